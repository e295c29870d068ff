"""CSV and SVG emission for runs: byte-reproducible tables, dependency-free plots.

Every file starts with '# key=value' header lines carrying the full run
configuration and seed, so re-running a config reproduces the bytes exactly.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header: dict, columns: list[str], rows) -> None:
    lines = [f"# {k}={_fmt(v)}" for k, v in header.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    header, columns, rows = {}, [], []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("# ") and "=" in line:
                k, v = line[2:].split("=", 1)
                header[k] = v
            elif not columns:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    return header, columns, rows


def write_correlator_csv(path, name: str, taus, values, header: dict | None = None) -> None:
    """Complex correlator series: tau, Re, Im."""
    meta = {"correlator": name}
    meta.update(header or {})
    vals = np.asarray(values, dtype=complex)
    write_csv(
        path,
        meta,
        ["tau", "re", "im"],
        [(float(t), float(v.real), float(v.imag)) for t, v in zip(taus, vals)],
    )


def write_measurement_csv(path, name: str, record, header: dict | None = None) -> None:
    meta = {
        "correlator": name,
        "protocol": record.protocol,
        "phi": record.phi,
        "lambda": record.lam,
        "shots": record.shots,
        "seed": record.seed,
    }
    meta.update(header or {})
    write_csv(
        path,
        meta,
        ["tau", "estimate", "stderr", "shots", "protocol", "phi", "lambda"],
        [
            (float(t), float(e), float(s), record.shots, record.protocol, record.phi, record.lam)
            for t, e, s in zip(record.taus, record.estimates, record.stderrs)
        ],
    )


def write_landscape_csv(path, result, header: dict | None = None) -> None:
    meta = dict(header or {})
    meta["optimum_alpha"] = result.best.alpha
    meta["optimum_beta"] = result.best.beta
    meta["optimum_energy"] = result.best.energy
    write_csv(path, meta, ["alpha", "beta", "energy", "stderr"], result.as_rows())


# -- minimal SVG plotting -----------------------------------------------------------


@dataclass
class _Frame:
    width: int = 640
    height: int = 420
    margin: int = 52
    xlim: tuple[float, float] = (0.0, 1.0)
    ylim: tuple[float, float] = (-1.0, 1.0)

    def x(self, v: float) -> float:
        lo, hi = self.xlim
        return self.margin + (v - lo) / (hi - lo) * (self.width - 2 * self.margin)

    def y(self, v: float) -> float:
        lo, hi = self.ylim
        return self.height - self.margin - (v - lo) / (hi - lo) * (self.height - 2 * self.margin)


def _ticks(lo, hi, n=5):
    raw = np.linspace(lo, hi, n)
    return [float(f"{v:.3g}") for v in raw]


def correlator_svg(
    path,
    title: str,
    taus,
    measured,
    stderr,
    analytic_taus=None,
    analytic=None,
    config_lines: tuple[str, ...] = (),
) -> None:
    """Overlay plot: analytic polyline, measured points, shaded stderr band."""
    taus = np.asarray(taus, dtype=float)
    measured = np.asarray(measured, dtype=float)
    stderr = np.asarray(stderr, dtype=float)
    ana_t = taus if analytic_taus is None else np.asarray(analytic_taus, dtype=float)
    ana = None if analytic is None else np.asarray(analytic, dtype=float)
    ys = [measured - stderr, measured + stderr] + ([ana] if ana is not None else [])
    ylo = min(float(np.min(y)) for y in ys)
    yhi = max(float(np.max(y)) for y in ys)
    pad = 0.08 * max(yhi - ylo, 1e-9)
    fr = _Frame(xlim=(float(taus.min()), float(max(taus.max(), 1e-9))), ylim=(ylo - pad, yhi + pad))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.width}" height="{fr.height}" '
        f'viewBox="0 0 {fr.width} {fr.height}">',
        f'<rect width="{fr.width}" height="{fr.height}" fill="white"/>',
        f'<text x="{fr.width/2:.1f}" y="24" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title}</text>',
    ]
    # axes
    x0, y0 = fr.margin, fr.height - fr.margin
    x1, y1 = fr.width - fr.margin, fr.margin
    parts.append(
        f'<path d="M {x0} {y1} L {x0} {y0} L {x1} {y0}" stroke="black" fill="none" stroke-width="1"/>'
    )
    for v in _ticks(*fr.xlim):
        parts.append(
            f'<line x1="{fr.x(v):.1f}" y1="{y0}" x2="{fr.x(v):.1f}" y2="{y0+4}" stroke="black"/>'
            f'<text x="{fr.x(v):.1f}" y="{y0+18}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{v:g}</text>'
        )
    for v in _ticks(*fr.ylim):
        parts.append(
            f'<line x1="{x0-4}" y1="{fr.y(v):.1f}" x2="{x0}" y2="{fr.y(v):.1f}" stroke="black"/>'
            f'<text x="{x0-8}" y="{fr.y(v)+4:.1f}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{v:g}</text>'
        )
    parts.append(
        f'<text x="{(x0+x1)/2:.0f}" y="{fr.height-12}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif">tau</text>'
    )
    # stderr band
    if np.any(stderr > 0):
        upper = [(fr.x(t), fr.y(m + s)) for t, m, s in zip(taus, measured, stderr)]
        lower = [(fr.x(t), fr.y(m - s)) for t, m, s in zip(taus, measured, stderr)][::-1]
        pts = " ".join(f"{a:.1f},{b:.1f}" for a, b in upper + lower)
        parts.append(f'<polygon points="{pts}" fill="#c6d9f1" opacity="0.7"/>')
    # analytic curve
    if ana is not None:
        pts = " ".join(f"{fr.x(t):.1f},{fr.y(v):.1f}" for t, v in zip(ana_t, ana))
        parts.append(f'<polyline points="{pts}" stroke="#1f4e9c" fill="none" stroke-width="1.6"/>')
    # measured points
    for t, m in zip(taus, measured):
        parts.append(f'<circle cx="{fr.x(t):.1f}" cy="{fr.y(m):.1f}" r="3.2" fill="#c0392b"/>')
    for i, line in enumerate(config_lines):
        parts.append(
            f'<text x="{x1}" y="{y1 + 14 + 13*i}" text-anchor="end" font-size="10" '
            f'fill="#555" font-family="monospace">{line}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(parts) + "\n")


def landscape_svg(path, title: str, alphas, betas, energies, best=None) -> None:
    """Simple heatmap of the energy landscape (row-major energies grid)."""
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    grid = np.asarray(energies, dtype=float).reshape(len(alphas), len(betas))
    lo, hi = float(grid.min()), float(grid.max())
    fr = _Frame(width=520, height=520, xlim=(betas[0], betas[-1]), ylim=(alphas[0], alphas[-1]))
    cw = (fr.width - 2 * fr.margin) / len(betas)
    ch = (fr.height - 2 * fr.margin) / len(alphas)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.width}" height="{fr.height}">',
        f'<rect width="{fr.width}" height="{fr.height}" fill="white"/>',
        f'<text x="{fr.width/2:.0f}" y="24" text-anchor="middle" font-size="15" '
        f'font-family="sans-serif">{title}</text>',
    ]
    for i, a in enumerate(alphas):
        for j, b in enumerate(betas):
            frac = 0.0 if hi == lo else (grid[i, j] - lo) / (hi - lo)
            r = int(255 * frac)
            bl = int(255 * (1 - frac))
            x = fr.margin + j * cw
            y = fr.height - fr.margin - (i + 1) * ch
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{cw+0.5:.1f}" height="{ch+0.5:.1f}" '
                f'fill="rgb({r},60,{bl})"/>'
            )
    if best is not None:
        bx = fr.margin + (np.searchsorted(betas, best[1])) * cw
        by = fr.height - fr.margin - (np.searchsorted(alphas, best[0]) + 1) * ch
        parts.append(
            f'<circle cx="{bx:.1f}" cy="{by:.1f}" r="5" fill="none" stroke="white" stroke-width="2"/>'
        )
    parts.append(
        f'<text x="{fr.width/2:.0f}" y="{fr.height-10}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif">beta (energy color: blue=min, red=max)</text>'
    )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(parts) + "\n")


def default_outdir() -> str:
    return os.environ.get("HUBBARD_GF_OUTDIR", ".")
