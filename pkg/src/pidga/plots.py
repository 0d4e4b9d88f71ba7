"""Static SVG charts of sweep results (no plotting dependency).

One chart per standard measure and one per performance index, delay on the
x axis, one polyline per tuning method.  Files are emitted by hand into a
fixed 800x600 viewBox so their structure (element counts, point counts) is
deterministic and testable; byte output depends only on the report.
"""

import math
import os

from .metrics import OBJECTIVES

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")

# (filename, measure field, axis label, log-scale y)
MEASURE_FIGS = (
    ("fig3a_po.svg", "percent_overshoot", "percent overshoot [%]", False),
    ("fig3b_st.svg", "settling_time", "settling time (5% band) [s]", False),
    ("fig3c_rt.svg", "rise_time", "rise time (0-95%) [s]", True),
    ("fig3d_pt.svg", "peak_time", "peak time [s]", False),
    ("fig3e_sm.svg", "stability_margin", "stability margin (loop gain)",
     False),
)

INDEX_FIGS = tuple(
    (f"fig4{letter}_{obj}.svg", obj, obj.upper(), False)
    for letter, obj in zip("abcde", OBJECTIVES))

_W, _H = 800, 600
_X0, _X1 = 90, 610  # plot rectangle
_Y0, _Y1 = 50, 520


def _ticks_linear(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _ticks_log(lo, hi):
    ticks = [10.0 ** k for k in range(math.floor(math.log10(lo)),
                                      math.ceil(math.log10(hi)) + 1)
             if lo <= 10.0 ** k <= hi]
    return ticks if len(ticks) >= 2 else [lo, hi]


def _fmt_tick(v):
    return f"{v:.4g}"


def _chart_svg(title, ylabel, xs, series, log_y=False):
    """series: list of (label, ys); returns the SVG document as a string."""
    xlo, xhi = min(xs), max(xs)
    if xlo == xhi:
        xlo, xhi = xlo - 1.0, xhi + 1.0
    ys_all = [y for _, ys in series for y in ys if math.isfinite(y)
              and (not log_y or y > 0)]
    if not ys_all:
        ys_all = [0.0, 1.0]
    ylo, yhi = min(ys_all), max(ys_all)
    if log_y:
        if ylo == yhi:
            ylo, yhi = ylo / 2, yhi * 2
        lg0, lg1 = math.log10(ylo), math.log10(yhi)
        pad = max(0.05 * (lg1 - lg0), 0.05)
        lg0, lg1 = lg0 - pad, lg1 + pad

        def ymap(v):
            return _Y1 - (math.log10(v) - lg0) / (lg1 - lg0) * (_Y1 - _Y0)

        yticks = _ticks_log(10 ** lg0, 10 ** lg1)
    else:
        if ylo == yhi:
            ylo, yhi = ylo - 1.0, yhi + 1.0
        pad = 0.05 * (yhi - ylo)
        ylo, yhi = ylo - pad, yhi + pad

        def ymap(v):
            return _Y1 - (v - ylo) / (yhi - ylo) * (_Y1 - _Y0)

        yticks = _ticks_linear(ylo, yhi)

    def xmap(v):
        return _X0 + (v - xlo) / (xhi - xlo) * (_X1 - _X0)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
           f'height="{_H}" viewBox="0 0 {_W} {_H}" '
           f'class="chart {"log" if log_y else "linear"}">',
           f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
           f'<text x="{(_X0 + _X1) / 2:.1f}" y="28" font-size="16" '
           f'text-anchor="middle" font-family="sans-serif">{title}</text>',
           # axes
           f'<line x1="{_X0}" y1="{_Y1}" x2="{_X1}" y2="{_Y1}" '
           f'stroke="black"/>',
           f'<line x1="{_X0}" y1="{_Y0}" x2="{_X0}" y2="{_Y1}" '
           f'stroke="black"/>']
    # x ticks sit at the data delays themselves
    for v in xs:
        px = xmap(v)
        out.append(f'<line x1="{px:.2f}" y1="{_Y1}" x2="{px:.2f}" '
                   f'y2="{_Y1 + 6}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{_Y1 + 10}" font-size="10" '
                   f'font-family="sans-serif" text-anchor="start" '
                   f'transform="rotate(45 {px:.2f} {_Y1 + 10})">'
                   f'{_fmt_tick(v)}</text>')
    for v in yticks:
        py = ymap(v)
        out.append(f'<line x1="{_X0 - 6}" y1="{py:.2f}" x2="{_X0}" '
                   f'y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{_X0 - 9}" y="{py + 3:.2f}" font-size="10" '
                   f'font-family="sans-serif" text-anchor="end">'
                   f'{_fmt_tick(v)}</text>')
    out.append(f'<text x="{(_X0 + _X1) / 2:.1f}" y="{_H - 14}" '
               f'font-size="12" text-anchor="middle" '
               f'font-family="sans-serif">delay [s]</text>')
    out.append(f'<text x="22" y="{(_Y0 + _Y1) / 2:.1f}" font-size="12" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'transform="rotate(-90 22 {(_Y0 + _Y1) / 2:.1f})">'
               f'{ylabel}</text>')
    for i, (label, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{xmap(x):.2f},{ymap(y):.2f}"
                       for x, y in zip(xs, ys)
                       if math.isfinite(y) and (not log_y or y > 0))
        out.append(f'<polyline class="series" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{pts}"/>')
        ly = _Y0 + 8 + 16 * i
        out.append(f'<line x1="{_X1 + 12}" y1="{ly}" x2="{_X1 + 40}" '
                   f'y2="{ly}" stroke="{color}" stroke-width="3" '
                   f'class="legend-swatch"/>')
        out.append(f'<text x="{_X1 + 46}" y="{ly + 4}" font-size="11" '
                   f'font-family="sans-serif" class="legend-label">'
                   f'{label}</text>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def emit_plots(report, outdir):
    """Write the ten comparison charts; returns the file paths."""
    if len(report.config.delays) < 2:
        raise ValueError("plots need at least two delays")
    os.makedirs(outdir, exist_ok=True)
    xs = list(report.config.delays)
    paths = []
    for fname, field, label, log_y in MEASURE_FIGS + INDEX_FIGS:
        series = []
        for m in report.methods:
            rows = report.method_rows(m)
            if field in OBJECTIVES:
                ys = [r.indices.by_name(field) for r in rows]
            else:
                ys = [getattr(r.measures, field) for r in rows]
            series.append((m, ys))
        svg = _chart_svg(f"{label} vs delay", label, xs, series, log_y)
        path = os.path.join(outdir, fname)
        with open(path, "w") as fh:
            fh.write(svg)
        paths.append(path)
    return paths
