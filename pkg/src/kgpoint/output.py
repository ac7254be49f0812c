"""Flat-file outputs: CSV series and the sectioned report document.

Float formatting uses repr of the Python float (shortest round-trip), so
identical runs produce byte-identical files and every reader recovers
exact values.
"""

from __future__ import annotations

import configparser
import io

import numpy as np

from .fields import FieldState, Grid
from .spectral import SpectrumEstimate, Window
from .volterra import SolveReport, TraceSeries


def _fmt(x) -> str:
    return repr(float(x))


def write_trace_csv(path: str, trace: TraceSeries,
                    energy_samples=None, charge_samples=None) -> None:
    e_rows = [] if energy_samples is None else list(energy_samples)
    q_rows = [] if charge_samples is None else list(charge_samples)
    e_map = {round(t / trace.dt): v for t, v in e_rows}
    q_map = {round(t / trace.dt): v for t, v in q_rows}
    lines = ["t,re_z,im_z,abs_z,energy,charge"]
    for j, z in enumerate(trace.z):
        t = j * trace.dt
        e = _fmt(e_map[j]) if j in e_map else ""
        q = _fmt(q_map[j]) if j in q_map else ""
        lines.append(f"{_fmt(t)},{_fmt(z.real)},{_fmt(z.imag)},{_fmt(abs(z))},{e},{q}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace_csv(path: str):
    """Returns (times, z, energy_rows, charge_rows)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "t,re_z,im_z,abs_z,energy,charge":
            raise ValueError(f"not a trace file: {path}")
        times, zs, e_rows, q_rows = [], [], [], []
        for line in fh:
            parts = line.rstrip("\n").split(",")
            t = float(parts[0])
            times.append(t)
            zs.append(complex(float(parts[1]), float(parts[2])))
            if parts[4]:
                e_rows.append((t, float(parts[4])))
            if parts[5]:
                q_rows.append((t, float(parts[5])))
    return np.array(times), np.array(zs), e_rows, q_rows


def write_snapshot_csv(path: str, state: FieldState) -> None:
    lines = [f"# time = {_fmt(state.time)}", "x,re_psi,im_psi,re_pi,im_pi"]
    for x, p, q in zip(state.grid.x, state.psi, state.pi):
        lines.append(f"{_fmt(x)},{_fmt(p.real)},{_fmt(p.imag)},{_fmt(q.real)},{_fmt(q.imag)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_snapshot_csv(path: str) -> FieldState:
    with open(path, "r", encoding="utf-8") as fh:
        time = 0.0
        line = fh.readline()
        if line.startswith("# time = "):
            time = float(line[len("# time = "):])
            line = fh.readline()
        if line.strip() != "x,re_psi,im_psi,re_pi,im_pi":
            raise ValueError(f"not a snapshot file: {path}")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    x = np.array([float(r[0]) for r in rows])
    psi = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    pi = np.array([complex(float(r[3]), float(r[4])) for r in rows])
    grid = Grid(half_extent=float(x[-1]), n_points=len(x))
    return FieldState(grid, psi, pi, time)


def write_spectrum_csv(path: str, spec: SpectrumEstimate) -> None:
    lines = [
        f"# window = {spec.window.value}",
        f"# t_center = {_fmt(spec.t_center)}",
        f"# t_width = {_fmt(spec.t_width)}",
        "omega,re_amp,im_amp",
    ]
    for w, a in zip(spec.freqs, spec.amps):
        lines.append(f"{_fmt(w)},{_fmt(a.real)},{_fmt(a.imag)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_spectrum_csv(path: str) -> SpectrumEstimate:
    meta = {}
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                key, _, val = line[2:].partition(" = ")
                meta[key] = val
            elif line and line != "omega,re_amp,im_amp":
                rows.append(line.split(","))
    freqs = np.array([float(r[0]) for r in rows])
    amps = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    return SpectrumEstimate(freqs=freqs, amps=amps,
                            window=Window(meta.get("window", "hann")),
                            t_center=float(meta.get("t_center", 0.0)),
                            t_width=float(meta.get("t_width", 0.0)))


def write_report(path: str, sections: dict[str, dict[str, str]]) -> None:
    cp = configparser.ConfigParser(interpolation=None)
    for name, kv in sections.items():
        cp[name] = {k: str(v) for k, v in kv.items()}
    buf = io.StringIO()
    cp.write(buf)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def read_report(path: str) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None)
    with open(path, "r", encoding="utf-8") as fh:
        cp.read_string(fh.read())
    return {name: dict(cp[name]) for name in cp.sections()}


def report_sections_from_solve(report: SolveReport) -> dict[str, dict[str, str]]:
    sec = {
        "status": report.status.value,
        "message": report.message,
        "steps": str(len(report.trace.z) - 1),
        "dt": repr(report.trace.dt),
    }
    if len(report.energy_samples):
        e = report.energy_samples[:, 1]
        sec["energy_initial"] = repr(float(e[0]))
        sec["energy_drift_max_rel"] = repr(float(np.max(np.abs(e - e[0]))
                                                 / max(abs(e[0]), 1e-30)))
    if len(report.charge_samples):
        q = report.charge_samples[:, 1]
        sec["charge_initial"] = repr(float(q[0]))
        sec["charge_drift_max_abs"] = repr(float(np.max(np.abs(q - q[0]))))
    return {"solve": sec}
