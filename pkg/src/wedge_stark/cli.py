"""Command-line front end producing plot-ready CSV and JSON.

    wedge-stark table1  [--out FILE]
    wedge-stark zeros   --theta0-min pi/20 --theta0-max 3pi/2 --steps 60
    wedge-stark sweep   --preset fig6 [--threads 4]
    wedge-stark sweep   --d 1 2 5 --theta0 pi/20 --f 1 10 --direction wide
    wedge-stark density --d 2 --theta0 3pi/2 --f 10 --direction wide --out dens.csv
    wedge-stark oracle  [CONFIG.json] [--mesh 256]

Angles are written as rational multiples of pi ("pi/20", "3pi/2") and parsed
exactly.  Sweeps enumerate d, theta0, L, f in that nesting order (f fastest)
and rows are written in that order whatever the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .density import MIN_RESOLUTION, density_grid
from .fd_oracle import canonical_configurations, compare
from .model import Direction, FieldConfig, ValidationError, make_wedge
from .specfun import first_zero
from .variational import ground_energy, stark_shift

THREADS_ENV = "WEDGE_STARK_THREADS"

TABLE1_D = (1, 2, 4, 6, 8, 10)
TABLE1_L = (1, 10, 100)
TABLE1_THETA = ("pi/20", "pi/10", "pi/2", "pi", "3pi/2")

_ANGLE_RE = re.compile(r"^\s*(?:(\d+)\s*\*?\s*)?pi\s*(?:/\s*(\d+))?\s*$", re.IGNORECASE)


class Angle:
    """An aperture given either as a rational multiple of pi or in radians."""

    __slots__ = ("multiple", "radians")

    def __init__(self, multiple: Fraction | None, radians: float):
        self.multiple = multiple
        self.radians = radians

    @classmethod
    def of_pi(cls, multiple: Fraction) -> "Angle":
        return cls(multiple, float(multiple) * math.pi)

    @property
    def label(self) -> str:
        if self.multiple is None:
            return repr(self.radians)
        num, den = self.multiple.numerator, self.multiple.denominator
        head = "pi" if num == 1 else f"{num}pi"
        return head if den == 1 else f"{head}/{den}"

    def __eq__(self, other):
        return isinstance(other, Angle) and (self.multiple, self.radians) == (
            other.multiple, other.radians)

    def __hash__(self):
        return hash((self.multiple, self.radians))

    def __repr__(self):
        return f"Angle({self.label})"


def parse_angle(text: str) -> Angle:
    m = _ANGLE_RE.match(text)
    if m:
        num = int(m.group(1)) if m.group(1) else 1
        den = int(m.group(2)) if m.group(2) else 1
        if den == 0:
            raise ValidationError(f"zero denominator in angle {text!r}")
        return Angle.of_pi(Fraction(num, den))
    try:
        return Angle(None, float(text))
    except ValueError:
        raise ValidationError(f"cannot parse angle {text!r} (use e.g. 'pi/20', '3pi/2')") from None


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _write_csv(path: str | None, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    return max(1, int(env)) if env else 1


# --- table 1 -----------------------------------------------------------------


def table1_rows():
    for d in TABLE1_D:
        for L in TABLE1_L:
            for label in TABLE1_THETA:
                angle = parse_angle(label)
                gs = ground_energy(make_wedge(d, angle.radians, L))
                yield d, L, label, gs.energy


def truncate2(value: float) -> str:
    """Two decimals by truncation toward -inf, the convention of the published table."""
    return f"{math.floor(value * 100.0) / 100.0:.2f}"


def cmd_table1(args) -> int:
    rows = [
        (d, L, label, f"{energy:.2f}", truncate2(energy), _fmt(energy))
        for d, L, label, energy in table1_rows()
    ]
    _write_csv(args.out, ("d", "L", "theta0_label", "energy", "energy_truncated", "energy_full"),
               rows)
    return 0


# --- first-zero curve ----------------------------------------------------------


def zero_curve(theta_min: Angle, theta_max: Angle, steps: int):
    if not (0 < theta_min.radians < theta_max.radians < 2 * math.pi):
        raise ValidationError("need 0 < theta0_min < theta0_max < 2*pi")
    if steps < 2:
        raise ValidationError("steps must be >= 2")
    out = []
    for k in range(steps):
        t = theta_min.radians + (theta_max.radians - theta_min.radians) * k / (steps - 1)
        m0 = math.pi / t
        out.append((t, m0, first_zero(m0).value))
    return out


def cmd_zeros(args) -> int:
    rows = zero_curve(parse_angle(args.theta0_min), parse_angle(args.theta0_max), args.steps)
    _write_csv(args.out, ("theta0", "m0", "alpha"),
               [(repr(t), repr(m0), repr(a)) for t, m0, a in rows])
    return 0


# --- shift sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    d: tuple[float, ...]
    theta0: tuple[Angle, ...]
    L: tuple[float, ...] = (1.0,)
    f: tuple[float, ...] = (1.0,)
    direction: Direction = Direction.TOWARD_WIDE
    out: str | None = None
    tol_energy: float = 1e-10
    tol_beta: float = 1e-8
    name: str = field(default="custom", compare=False)

    def points(self):
        for d in self.d:
            for t in self.theta0:
                for L in self.L:
                    for f in self.f:
                        yield d, t, L, f


def _pi_grid(num_lo: int, num_hi: int, den: int):
    return tuple(Angle.of_pi(Fraction(k, den)) for k in range(num_lo, num_hi + 1))


def _angles(*labels):
    return tuple(parse_angle(s) for s in labels)


RADII = tuple(float(d) for d in range(1, 11))
FIELD_GRID = tuple(k * 0.5 for k in range(0, 21))

PRESETS = {
    # shift vs radius, apertures below pi, field toward the wide part
    "fig3": SweepSpec(RADII, _angles("pi/20", "pi/10", "pi/2"), f=(1.0, 10.0), name="fig3"),
    # shift vs aperture at d = 5, f = 1
    "fig4": SweepSpec((5.0,), _pi_grid(1, 20, 20), f=(1.0,), name="fig4"),
    # as fig3 for apertures >= pi
    "fig5": SweepSpec(RADII, _angles("pi", "3pi/2"), f=(1.0, 10.0), name="fig5"),
    # shift vs field for the two extreme apertures and several radii
    "fig6": SweepSpec((1.0, 2.0, 5.0, 10.0), _angles("pi/20", "3pi/2"), f=FIELD_GRID,
                      name="fig6"),
    # field toward the tip
    "fig9": SweepSpec(RADII, _angles("pi/20", "pi/15", "pi/10", "pi/2", "pi", "3pi/2"),
                      f=(0.5, 1.0, 10.0), direction=Direction.TOWARD_TIP, name="fig9"),
}

SWEEP_HEADER = ("d", "theta0", "L", "f", "direction", "beta_star", "energy", "shift", "errors")


def _sweep_row(spec: SweepSpec, point):
    d, angle, L, f = point
    base = [_fmt(d), angle.label, _fmt(L), _fmt(f), spec.direction.value]
    try:
        res = stark_shift(make_wedge(d, angle.radians, L), FieldConfig(f, spec.direction),
                          tol_beta=spec.tol_beta, rel_tol=spec.tol_energy)
    except Exception as exc:  # recorded per row; the sweep carries on
        return base + ["", "", "", f"{type(exc).__name__}: {exc}"]
    return base + [_fmt(res.beta_star), _fmt(res.energy), _fmt(res.shift), ""]


def run_sweep(spec: SweepSpec, threads: int = 1):
    points = list(spec.points())
    if threads <= 1:
        return [_sweep_row(spec, p) for p in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda p: _sweep_row(spec, p), points))


def read_sweep_csv(path) -> list[dict]:
    """Parse a sweep file back into typed records."""
    with open(path, encoding="utf-8", newline="") as fh:
        out = []
        for row in csv.DictReader(fh):
            rec = {
                "d": float(row["d"]),
                "theta0": parse_angle(row["theta0"]),
                "L": float(row["L"]),
                "f": float(row["f"]),
                "direction": Direction.parse(row["direction"]),
                "errors": row["errors"],
            }
            for key in ("beta_star", "energy", "shift"):
                rec[key] = float(row[key]) if row[key] else None
            out.append(rec)
        return out


def _spec_from_args(args) -> SweepSpec:
    if args.preset:
        spec = PRESETS[args.preset]
        overrides = {}
        if args.direction:
            overrides["direction"] = Direction.parse(args.direction)
    else:
        if not (args.d and args.theta0):
            raise ValidationError("sweep needs --preset or both --d and --theta0")
        spec = SweepSpec(tuple(args.d), tuple(parse_angle(t) for t in args.theta0))
        overrides = {
            "L": tuple(args.L) if args.L else spec.L,
            "f": tuple(args.f) if args.f else spec.f,
            "direction": Direction.parse(args.direction) if args.direction else spec.direction,
        }
    return SweepSpec(
        spec.d, spec.theta0, overrides.get("L", spec.L), overrides.get("f", spec.f),
        overrides.get("direction", spec.direction), args.out,
        args.tol_energy, args.tol_beta, spec.name,
    )


def cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    rows = run_sweep(spec, _threads(args))
    _write_csv(spec.out, SWEEP_HEADER, rows)
    failed = sum(1 for r in rows if r[-1])
    if failed:
        print(f"{failed} of {len(rows)} rows failed; see the errors column", file=sys.stderr)
        return 1
    return 0


# --- density maps ------------------------------------------------------------------


def density_outputs(d: float, angle: Angle, f: float, direction: Direction, resolution: int,
                    L: float = 1.0):
    wedge = make_wedge(d, angle.radians, L)
    grid = density_grid(wedge, FieldConfig(f, direction), resolution)
    rows = [(repr(x), repr(y), repr(v)) for x, y, v in grid.rows()]
    sidecar = {
        "d": d,
        "theta0": angle.label,
        "L": L,
        "f": f,
        "direction": direction.value,
        "resolution": resolution,
        "beta_star": grid.beta_star,
        "normalization": grid.normalization,
        "n_peaks": len(grid.peaks),
        "peaks": [{"x": p.x, "y": p.y, "height": p.height} for p in grid.peaks],
    }
    return rows, sidecar


def cmd_density(args) -> int:
    direction = Direction.parse(args.direction or "wide")
    if args.resolution < MIN_RESOLUTION:
        raise ValidationError(f"--resolution must be >= {MIN_RESOLUTION}")
    rows, sidecar = density_outputs(args.d, parse_angle(args.theta0), args.f, direction,
                                    args.resolution, args.L)
    _write_csv(args.out, ("x", "y", "density"), rows)
    text = json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
    if args.out and args.out != "-":
        Path(args.out).with_suffix(".json").write_text(text, encoding="utf-8")
    else:
        sys.stderr.write(text)
    return 0


# --- oracle comparison -----------------------------------------------------------------


def _load_oracle_config(path: str | None, mesh_override):
    if path is None:
        configs = canonical_configurations()
        mesh = (256, 256)
    else:
        data = json.loads(Path(path).read_text(encoding="utf-8") or "{}")
        entries = data.get("configurations") or []
        if not entries:
            raise ValidationError(f"{path}: no configurations listed")
        configs = []
        for e in entries:
            angle = parse_angle(str(e["theta0"]))
            configs.append((
                make_wedge(float(e["d"]), angle.radians, float(e.get("L", 1.0))),
                FieldConfig(float(e.get("f", 0.0)), Direction.parse(e.get("direction", "wide"))),
            ))
        mesh = tuple(data.get("mesh", (256, 256)))
    if mesh_override:
        mesh = (mesh_override, mesh_override)
    return configs, mesh


def run_oracle(configs, mesh, threads: int = 1):
    def one(cfg):
        wedge, fld = cfg
        rep = compare(wedge, fld, mesh)
        if not rep["reliable"]:
            rep["warning"] = "unreliable error estimate (mesh too coarse or no clean convergence rate)"
        return rep

    if threads <= 1:
        return [one(c) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, configs))


def cmd_oracle(args) -> int:
    configs, mesh = _load_oracle_config(args.config, args.mesh)
    reports = run_oracle(configs, mesh, _threads(args))
    violations = [r for r in reports if not r["bound_holds"]]
    payload = {
        "mesh": list(mesh),
        "all_bounds_hold": not violations,
        "reports": reports,
    }
    text = json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n"
    if args.out and args.out != "-":
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if violations:
        v = violations[0]
        print(
            f"variational bound violated: d={v['d']}, theta0={v['theta0']}, f={v['f']}, "
            f"direction={v['direction']}: E_var={v['e_var']} < E_fd={v['e_fd']} "
            f"- err={v['error_estimate']}",
            file=sys.stderr,
        )
        return 1
    return 0


# --- argument parsing ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wedge-stark",
        description="Variational Stark shift of an electron in a wedge-shaped quantum box.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, threads=False):
        p.add_argument("--out", default=None, help="output file (default: stdout)")
        if threads:
            p.add_argument("--threads", type=int, default=None,
                           help=f"worker threads (default: ${THREADS_ENV} or 1)")

    p = sub.add_parser("table1", help="zero-field ground energies for the 90 tabulated boxes")
    common(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("zeros", help="first Bessel zero alpha versus aperture")
    common(p)
    p.add_argument("--theta0-min", default="pi/20")
    p.add_argument("--theta0-max", default="3pi/2")
    p.add_argument("--steps", type=int, default=60)
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("sweep", help="Stark shifts over a grid of d, theta0, L, f")
    common(p, threads=True)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--d", type=float, nargs="+")
    p.add_argument("--theta0", nargs="+")
    p.add_argument("--L", type=float, nargs="+")
    p.add_argument("--f", type=float, nargs="+")
    p.add_argument("--direction", help="wide (+x) or tip (-x)")
    p.add_argument("--tol-energy", type=float, default=1e-10,
                   help="relative quadrature tolerance for energy integrals")
    p.add_argument("--tol-beta", type=float, default=1e-8)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("density", help="density map Psi^2(x, y, 0) at the optimal beta")
    common(p)
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--theta0", required=True)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--f", type=float, default=0.0)
    p.add_argument("--direction", default="wide")
    p.add_argument("--resolution", type=int, default=256)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("oracle", help="finite-difference bound check of variational energies")
    common(p, threads=True)
    p.add_argument("config", nargs="?", default=None,
                   help="JSON file with 'configurations' (and optional 'mesh'); "
                        "omit for the built-in 12-configuration batch")
    p.add_argument("--mesh", type=int, default=None, help="intervals per axis")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, json.JSONDecodeError, KeyError) as exc:
        parser.error(str(exc))  # exits with status 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
