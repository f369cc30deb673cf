"""Command line interface.

Subcommands: ``project`` (continuous or discrete forward projection),
``check`` (range-condition test on data), ``separability`` (exponential
fan-fan surface test), ``solve`` (CGNE on the discrete pair), ``verify``
(built-in invariant battery).  Configuration is an INI file; every key has a
default reproducing the shipped reference experiment, so an empty (or
absent) config is valid.  Angles in config files are degrees; the library
works in radians.  Outputs are deterministic: rerunning a command with the
same config and seed writes byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .consistency import (
    eval_G,
    expo_surface,
    kernel_condition_residual,
    known_kernels,
    pprc_sides,
    separability_test,
)
from .discrete import (
    DetectorGrid,
    ImageGrid,
    PairOperator,
    ProjectionData,
    rasterize,
    read_projection_csv,
    write_image,
    write_pgm,
    write_projection_csv,
)
from .errors import ConfigurationError, ProjPairError
from .geometry import (
    ATTENUATION_MU,
    FanGeometry,
    ImageDomain,
    PairGeometry,
    ParGeometry,
    check_pair_admissible,
    cross2,
    direction,
    lift_angle,
    pair_orientation,
    perp,
    reference_domain,
    view_range,
)
from .phantom import Bump, Phantom, TargetData, inconceivable_g2, random_phantom, reference_target
from .projector import project_view
from .solver import cgne_solve, predicted_residual_floor

_DEFAULTS = {
    "geometry": {
        "kind": "fan-fan",
        "vertex1": "0 80",
        "vertex2": "-80 0",
        "mu": str(ATTENUATION_MU),
        "theta1_deg": "0",
        "theta2_deg": "90",
    },
    "domain": {
        "kind": "reference",
        "half_width": "35",
        "half_height": "35",
        "center": "0 0",
        "radius": "30",
        "vertices": "",
    },
    "image": {"nx": "200", "ny": "200", "extent": "70"},
    "detectors": {"bins1": "100", "bins2": "100", "range1_deg": "", "range2_deg": ""},
    "target": {"kind": "reference", "file1": "", "file2": ""},
    "phantom": {"kind": "random", "count": "3", "bumps": "", "file": ""},
    "project": {"mode": "continuous"},
    "solver": {"max_iter": "2000", "tol": "1e-3"},
    "check": {"tol": "1e-6"},
    "separability": {"n1": "160", "n2": "160", "include_test_tuple": "true"},
    "output": {"pgm_window": "", "pgm_level": ""},
}


def _load_config(path: str | None) -> tuple[configparser.ConfigParser, str]:
    cp = configparser.ConfigParser()
    cp.read_dict(_DEFAULTS)
    raw = ""
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        raw = p.read_text(encoding="utf-8")
        try:
            cp.read_string(raw)
        except configparser.Error as exc:
            raise ConfigurationError(f"malformed config: {exc}") from exc
    return cp, raw


def _parse_vec(text: str, what: str) -> tuple[float, float]:
    parts = text.replace(",", " ").split()
    if len(parts) != 2:
        raise ConfigurationError(f"{what} needs two numbers, got {text!r}")
    return float(parts[0]), float(parts[1])


def _build_domain(cp: configparser.ConfigParser) -> ImageDomain:
    sec = cp["domain"]
    kind = sec["kind"].strip().lower()
    if kind == "reference":
        return reference_domain()
    if kind == "rectangle":
        cx, cy = _parse_vec(sec["center"], "domain center")
        return ImageDomain.rectangle(sec.getfloat("half_width"), sec.getfloat("half_height"), center=(cx, cy))
    if kind == "disc":
        cx, cy = _parse_vec(sec["center"], "domain center")
        return ImageDomain.disc((cx, cy), sec.getfloat("radius"))
    if kind == "polygon":
        vals = [float(v) for v in sec["vertices"].replace(",", " ").split()]
        if len(vals) < 6 or len(vals) % 2:
            raise ConfigurationError("polygon vertices must be an even list of at least six numbers")
        return ImageDomain.polygon(np.array(vals).reshape(-1, 2))
    raise ConfigurationError(f"unknown domain kind {kind!r}")


def _auto_theta0(vertex, domain: ImageDomain) -> float:
    pts = domain.boundary_points(256)
    d = pts - np.asarray(vertex, float)
    ang = np.arctan2(d[:, 1], d[:, 0])
    mean = np.angle(np.mean(np.exp(1j * ang)))
    return float(mean - math.pi)


def _build_pair(cp: configparser.ConfigParser) -> PairGeometry:
    sec = cp["geometry"]
    kind = sec["kind"].strip().lower()
    domain = _build_domain(cp)
    mu = sec.getfloat("mu")
    if kind == "fan-fan":
        v1 = _parse_vec(sec["vertex1"], "vertex1")
        v2 = _parse_vec(sec["vertex2"], "vertex2")
        dl = np.array(v2) - np.array(v1)
        s = 1.0 if cross2(domain.reference_point() - np.array(v1), dl) > 0 else -1.0
        pd = perp(s * dl)
        theta0 = math.atan2(pd[1], pd[0])
        return PairGeometry(
            first=FanGeometry(vertex=v1, theta0=theta0, mu=mu),
            second=FanGeometry(vertex=v2, theta0=theta0, mu=mu),
            domain=domain,
        )
    if kind == "par-fan":
        theta = math.radians(sec.getfloat("theta1_deg"))
        v2 = _parse_vec(sec["vertex2"], "vertex2")
        return PairGeometry(
            first=ParGeometry(theta=theta),
            second=FanGeometry(vertex=v2, theta0=_auto_theta0(v2, domain), mu=mu),
            domain=domain,
        )
    if kind == "par-par":
        return PairGeometry(
            first=ParGeometry(theta=math.radians(sec.getfloat("theta1_deg"))),
            second=ParGeometry(theta=math.radians(sec.getfloat("theta2_deg"))),
            domain=domain,
        )
    raise ConfigurationError(f"unknown geometry kind {kind!r}")


def _build_detectors(cp: configparser.ConfigParser, pair: PairGeometry) -> tuple[DetectorGrid, DetectorGrid]:
    sec = cp["detectors"]
    grids = []
    for view, geom in ((1, pair.first), (2, pair.second)):
        n = sec.getint(f"bins{view}")
        spec = sec[f"range{view}_deg"].strip()
        if spec:
            lo, hi = _parse_vec(spec, f"range{view}_deg")
            if isinstance(geom, FanGeometry):
                lo, hi = math.radians(lo), math.radians(hi)
                lo = float(lift_angle(lo, geom.theta0))
                hi = float(lift_angle(hi, geom.theta0))
                if hi <= lo:
                    hi += 2.0 * math.pi
        else:
            lo, hi = view_range(geom, pair.domain, n_boundary=4096)
        grids.append(DetectorGrid(view, n, lo, hi))
    return grids[0], grids[1]


def _build_phantom(cp: configparser.ConfigParser, pair: PairGeometry, seed: int) -> Phantom:
    sec = cp["phantom"]
    kind = sec["kind"].strip().lower()
    if kind == "random":
        rng = np.random.default_rng(seed)
        return random_phantom(rng, pair.domain, n_bumps=sec.getint("count"))
    if kind == "list":
        rows = [row.strip() for row in sec["bumps"].split(";") if row.strip()]
        bumps = []
        for row in rows:
            vals = [float(v) for v in row.replace(",", " ").split()]
            if len(vals) != 4:
                raise ConfigurationError(f"bump row needs 'cx cy radius amplitude', got {row!r}")
            bumps.append(Bump(center=(vals[0], vals[1]), radius=vals[2], amplitude=vals[3]))
        return Phantom(bumps=tuple(bumps))
    if kind == "file":
        path = sec["file"].strip()
        if not path:
            raise ConfigurationError("phantom kind 'file' needs a file path")
        bumps = []
        for line in Path(path).read_text().splitlines():
            line = line.split("#")[0].strip()
            if not line:
                continue
            vals = [float(v) for v in line.replace(",", " ").split()]
            if len(vals) != 4:
                raise ConfigurationError(f"phantom file row needs four numbers, got {line!r}")
            bumps.append(Bump(center=(vals[0], vals[1]), radius=vals[2], amplitude=vals[3]))
        return Phantom(bumps=tuple(bumps))
    raise ConfigurationError(f"unknown phantom kind {kind!r}")


def _build_target(cp, pair, dets, seed) -> TargetData:
    sec = cp["target"]
    kind = sec["kind"].strip().lower()
    if kind == "reference":
        ref = reference_target(dets[0].n_bins)
        same = (
            dets[0].n_bins == dets[1].n_bins
            and abs(ref.view1.grid.lo - dets[0].lo) < 1e-9
            and abs(ref.view2.grid.lo - dets[1].lo) < 1e-9
        )
        if not same:
            # same profile, evaluated on the configured grids
            g2 = inconceivable_g2(dets[1].centers - dets[1].center)
            return TargetData(
                view1=ProjectionData(grid=dets[0], values=np.zeros(dets[0].n_bins)),
                view2=ProjectionData(grid=dets[1], values=g2),
            )
        return ref
    if kind == "files":
        f1, f2 = sec["file1"].strip(), sec["file2"].strip()
        if not f1 or not f2:
            raise ConfigurationError("target kind 'files' needs file1 and file2")
        return TargetData(view1=read_projection_csv(f1), view2=read_projection_csv(f2))
    if kind == "phantom":
        ph = _build_phantom(cp, pair, seed)
        d1 = project_view(pair.first, ph, dets[0])
        d2 = project_view(pair.second, ph, dets[1])
        return TargetData(view1=d1, view2=d2)
    raise ConfigurationError(f"unknown target kind {kind!r}")


def _write_common(outdir: Path, cp: configparser.ConfigParser, raw: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config_used.ini").write_text(raw, encoding="utf-8")
    with open(outdir / "config_resolved.ini", "w", encoding="utf-8") as fh:
        cp.write(fh)


def _phantom_text(ph: Phantom) -> str:
    lines = ["# cx cy radius amplitude"]
    for b in ph.bumps:
        lines.append(
            " ".join(format(v, ".17g") for v in (b.center[0], b.center[1], b.radius, b.amplitude))
        )
    return "\n".join(lines) + "\n"


def _emit(text: str, outdir: Path | None, name: str) -> None:
    sys.stdout.write(text)
    if outdir is not None:
        (outdir / name).write_text(text, encoding="ascii")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_project(args) -> int:
    cp, raw = _load_config(args.config)
    if args.mode:
        cp["project"]["mode"] = args.mode
    pair = _build_pair(cp)
    dets = _build_detectors(cp, pair)
    outdir = Path(args.out)
    _write_common(outdir, cp, raw)
    ph = _build_phantom(cp, pair, args.seed)
    (outdir / "phantom_used.txt").write_text(_phantom_text(ph), encoding="ascii")
    mode = cp["project"]["mode"].strip().lower()
    if mode == "continuous":
        d1 = project_view(pair.first, ph, dets[0])
        d2 = project_view(pair.second, ph, dets[1])
    elif mode == "discrete":
        sec = cp["image"]
        image = ImageGrid.from_domain(sec.getint("nx"), sec.getint("ny"), pair.domain, sec.getfloat("extent"))
        op = PairOperator(pair, image, dets[0], dets[1])
        f = rasterize(ph, op.image)
        g1, g2 = op.forward(f)
        d1 = ProjectionData(grid=dets[0], values=g1)
        d2 = ProjectionData(grid=dets[1], values=g2)
        write_image(outdir / "phantom.img", op.image, f)
    else:
        raise ConfigurationError(f"unknown projection mode {mode!r}")
    write_projection_csv(outdir / "view1.csv", d1)
    write_projection_csv(outdir / "view2.csv", d2)
    _emit(
        "project: mode={} bumps={} bins=({}, {}) max=({:.6g}, {:.6g})\n".format(
            mode, len(ph.bumps), dets[0].n_bins, dets[1].n_bins,
            float(np.max(d1.values)), float(np.max(d2.values)),
        ),
        outdir,
        "summary.txt",
    )
    return 0


def cmd_check(args) -> int:
    cp, raw = _load_config(args.config)
    if args.tol is not None:
        cp["check"]["tol"] = format(args.tol, ".17g")
    pair = _build_pair(cp)
    dets = _build_detectors(cp, pair)
    outdir = Path(args.out)
    _write_common(outdir, cp, raw)
    kernels = known_kernels(pair)
    if kernels is None:
        _emit(
            "check: no kernels exist for this pair (exponential fan-fan, mu != 0); "
            "every nonzero-mean datum is unobstructed\n",
            outdir,
            "report.txt",
        )
        return 2
    target = _build_target(cp, pair, dets, args.seed)
    admiss = check_pair_admissible(pair)
    worst_name = min(admiss.margins, key=admiss.margins.get)
    left, right = pprc_sides(target, kernels)
    residual = left - right
    scale = max(abs(left), abs(right))
    rel = abs(residual) / scale if scale > 0 else abs(residual)
    tol = cp["check"].getfloat("tol")
    consistent = rel <= tol
    text = (
        f"check: kind={pair.kind} kernels={kernels.label!r}\n"
        f"  admissible = {admiss.passed} (tightest margin {worst_name} = "
        f"{admiss.margins[worst_name]:.6g})\n"
        f"  side1 = {left:.17g}\n  side2 = {right:.17g}\n"
        f"  residual = {residual:.17g}\n  relative = {rel:.17g}\n  tol = {tol:.17g}\n"
        f"  verdict = {'consistent' if consistent else 'INCONSISTENT'}\n"
    )
    _emit(text, outdir, "report.txt")
    return 0 if consistent else 1


def _test_tuple(theta0: float) -> tuple[float, float, float, float]:
    base = theta0 + math.pi
    return (base + math.pi / 4.0, base + math.pi / 6.0, base, base - math.pi / 6.0)


def cmd_separability(args) -> int:
    cp, raw = _load_config(args.config)
    if args.n1:
        cp["separability"]["n1"] = str(args.n1)
    if args.n2:
        cp["separability"]["n2"] = str(args.n2)
    sec = cp["geometry"]
    if sec["kind"].strip().lower() != "fan-fan":
        raise ConfigurationError("separability applies to fan-fan geometry")
    pair = _build_pair(cp)
    outdir = Path(args.out)
    _write_common(outdir, cp, raw)
    v1 = pair.first.vertex_xy
    v2 = pair.second.vertex_xy
    mu = pair.first.mu
    s = pair_orientation(pair)
    theta0 = pair.first.theta0
    ssec = cp["separability"]
    n1, n2 = ssec.getint("n1"), ssec.getint("n2")
    margin = math.pi / 48.0
    lo, hi = theta0 + 0.5 * math.pi + margin, theta0 + 1.5 * math.pi - margin
    r1_axis = np.linspace(theta0 + math.pi, hi, n1)
    r2_axis = np.linspace(lo, theta0 + math.pi, n2)
    tup = _test_tuple(theta0)
    if ssec.getboolean("include_test_tuple"):
        r1_axis = np.union1d(r1_axis, [tup[0], tup[1]])
        r2_axis = np.union1d(r2_axis, [tup[2], tup[3]])
    L, valid = expo_surface(r1_axis, r2_axis, mu, v1, v2, orientation=s)
    report = separability_test(L, r1_axis, r2_axis)
    g_tuple = float(eval_G(tup[0], tup[1], tup[2], tup[3], mu, v2 - v1))
    text = (
        f"separability: mu = {mu:.17g}, grid = {len(r1_axis)} x {len(r2_axis)}\n"
        f"  scale (max |L|) = {report.scale:.17g}\n"
        f"  max |D| = {report.max_abs_D:.17g}\n"
        f"  threshold = {report.threshold:.17g}\n"
        f"  argmax (r1, r1', r2, r2') rad = "
        + " ".join(format(v, ".17g") for v in report.argmax)
        + "\n"
        f"  double difference at the test tuple = {g_tuple:.17g}\n"
        f"  verdict = {report.verdict}\n"
    )
    _emit(text, outdir, "separability.txt")
    return 0


def _central_profile(op: PairOperator, f: np.ndarray, view: int, n_samples: int = 512) -> str:
    geom = (op.pair.first, op.pair.second)[view - 1]
    det = op.dets[view - 1]
    v = geom.vertex_xy
    d = direction(det.center)
    half = 0.5 * op.image.extent
    ts = []
    for axis in (0, 1):
        if abs(d[axis]) > 1e-15:
            ts.extend([(-half - v[axis]) / d[axis], (half - v[axis]) / d[axis]])
    ts = [t for t in ts if t > 0]
    t_lo, t_hi = min(ts), max(ts)
    dx, dy = op.image.pixel_size
    img = f.reshape(op.image.ny, op.image.nx)
    lines = ["t,x,y,value"]
    for k in range(n_samples):
        t = t_lo + (t_hi - t_lo) * (k + 0.5) / n_samples
        x, y = v + t * d
        ix = int(math.floor((x + half) / dx))
        iy = int(math.floor((y + half) / dy))
        if 0 <= ix < op.image.nx and 0 <= iy < op.image.ny:
            val = img[iy, ix]
            lines.append(
                ",".join(format(q, ".17g") for q in (t, x, y, float(val)))
            )
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    cp, raw = _load_config(args.config)
    if args.max_iter is not None:
        cp["solver"]["max_iter"] = str(args.max_iter)
    if args.tol is not None:
        cp["solver"]["tol"] = format(args.tol, ".17g")
    pair = _build_pair(cp)
    if pair.kind != "fan-fan":
        raise ConfigurationError("solve needs fan-fan geometry")
    dets = _build_detectors(cp, pair)
    outdir = Path(args.out)
    _write_common(outdir, cp, raw)
    isec = cp["image"]
    image = ImageGrid.from_domain(isec.getint("nx"), isec.getint("ny"), pair.domain, isec.getfloat("extent"))
    op = PairOperator(pair, image, dets[0], dets[1])
    target = _build_target(cp, pair, dets, args.seed)
    g = np.concatenate([target.g1, target.g2])
    state = cgne_solve(op, g, max_iter=cp["solver"].getint("max_iter"), tol=cp["solver"].getfloat("tol"))
    write_image(outdir / "iterate.img", op.image, state.iterate)
    wsec = cp["output"]
    window = float(wsec["pgm_window"]) if wsec["pgm_window"].strip() else None
    level = float(wsec["pgm_level"]) if wsec["pgm_level"].strip() else None
    write_pgm(outdir / "iterate.pgm", op.image, state.iterate, window=window, level=level)
    hist_lines = ["iteration,relative_residual"]
    hist_lines += [f"{k},{format(v, '.17g')}" for k, v in enumerate(state.residual_history)]
    (outdir / "residuals.csv").write_text("\n".join(hist_lines) + "\n", encoding="ascii")
    (outdir / "profile_view1.csv").write_text(_central_profile(op, state.iterate, 1), encoding="ascii")
    (outdir / "profile_view2.csv").write_text(_central_profile(op, state.iterate, 2), encoding="ascii")
    kernels = known_kernels(pair)
    if kernels is None:
        floor_text = "none (no kernels exist for mu != 0)"
    else:
        floor = predicted_residual_floor(target, kernels)
        floor_text = format(floor / float(np.linalg.norm(g)) if np.linalg.norm(g) > 0 else floor, ".17g")
        floor_text += " (relative)"
    text = (
        f"solve: image = {op.image.nx} x {op.image.ny}, bins = ({dets[0].n_bins}, {dets[1].n_bins}), "
        f"mu = {pair.first.mu:.17g}\n"
        f"  iterations = {state.iterations} ({state.stop_reason})\n"
        f"  final relative residual = {state.final_residual:.17g}\n"
        f"  predicted residual floor = {floor_text}\n"
    )
    _emit(text, outdir, "summary.txt")
    return 0


def _verify_lines() -> tuple[list[str], bool]:
    from .geometry import fan_inverse, fan_jacobian_inv, fan_point, fanfan_X, fanfan_tau, par_inverse, par_point
    from .geometry import reference_pair

    lines: list[str] = []
    ok_all = True

    def record(name: str, ok: bool, detail: str) -> None:
        nonlocal ok_all
        ok_all &= ok
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")

    rng = np.random.default_rng(20240817)

    # round trips
    worst = 0.0
    for _ in range(200):
        g = ParGeometry(theta=rng.uniform(-4, 4))
        r, t = rng.uniform(-50, 50), rng.uniform(-50, 50)
        rr, tt = par_inverse(g, par_point(g, r, t))
        worst = max(worst, abs(rr - r), abs(tt - t))
    record("parallel round trip", worst < 1e-12, f"worst {worst:.3e}")
    worst = 0.0
    for _ in range(200):
        g = FanGeometry(vertex=(rng.uniform(-90, 90), rng.uniform(-90, 90)), theta0=rng.uniform(-7, 7))
        r = g.theta0 + rng.uniform(0.01, 2 * math.pi - 0.01)
        t = rng.uniform(0.1, 150)
        rr, tt = fan_inverse(g, fan_point(g, np.array(r), np.array(t)))
        worst = max(worst, abs(float(rr) - r), abs(float(tt) - t))
    record("fan round trip", worst < 1e-12, f"worst {worst:.3e}")

    # jacobian vs central differences
    g = FanGeometry(vertex=(3.0, -2.0), theta0=0.0)
    worst = 0.0
    for _ in range(50):
        x = np.array([rng.uniform(4, 40), rng.uniform(1, 40)])
        h = 1e-5
        j = np.zeros((2, 2))
        for axis in range(2):
            e = np.zeros(2)
            e[axis] = h
            rp, tp = fan_inverse(g, x + e)
            rm, tm = fan_inverse(g, x - e)
            j[0, axis] = (rp - rm) / (2 * h)
            j[1, axis] = (tp - tm) / (2 * h)
        det_fd = abs(j[0, 0] * j[1, 1] - j[0, 1] * j[1, 0])
        worst = max(worst, abs(det_fd - float(fan_jacobian_inv(g, x))))
    record("fan inverse jacobian", worst < 1e-6, f"worst {worst:.3e}")

    # intersection identities
    worst = 0.0
    for _ in range(100):
        v1 = np.array([rng.uniform(-90, 90), rng.uniform(-90, 90)])
        v2 = np.array([rng.uniform(-90, 90), rng.uniform(-90, 90)])
        if np.hypot(*(v2 - v1)) < 1.0:
            continue
        r1 = rng.uniform(-math.pi, math.pi)
        r2 = rng.uniform(-math.pi, math.pi)
        try:
            t1, t2 = fanfan_tau(r1, r2, v1, v2)
        except ProjPairError:
            continue
        x = fanfan_X(r1, r2, v1, v2)
        worst = max(worst, float(np.max(np.abs(v1 + float(t1) * direction(r1) - x))))
        worst = max(worst, float(np.max(np.abs(v2 + float(t2) * direction(r2) - x))))
    record("ray intersection identities", worst < 1e-10, f"worst {worst:.3e}")

    # kernel conditions for the three closed forms
    worst = 0.0
    pair_ref = reference_pair(mu=0.0)
    worst = max(worst, kernel_condition_residual(pair_ref, known_kernels(pair_ref), n=900))
    dom = ImageDomain.disc((5.0, -3.0), 14.0)
    pf = PairGeometry(ParGeometry(theta=0.3), FanGeometry(vertex=(-60.0, 4.0), theta0=-2.9), dom)
    worst = max(worst, kernel_condition_residual(pf, known_kernels(pf), n=900))
    pp = PairGeometry(ParGeometry(theta=0.1), ParGeometry(theta=1.4), dom)
    worst = max(worst, kernel_condition_residual(pp, known_kernels(pp), n=900))
    record("kernel conditions", worst < 1e-12, f"worst relative {worst:.3e}")

    # adjoint dot test
    from .discrete import reference_operator

    op = reference_operator(nx=48, n_bins=32, mu=ATTENUATION_MU)
    f = rng.standard_normal(op.image.n_pixels)
    g1, g2 = op.forward(f)
    y1 = rng.standard_normal(g1.size)
    y2 = rng.standard_normal(g2.size)
    lhs = float(g1 @ y1 + g2 @ y2)
    rhs = float(f @ op.adjoint(y1, y2))
    rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
    record("adjoint identity", rel < 1e-12, f"relative {rel:.3e}")

    # small exact solves
    state = cgne_solve(np.diag([1.0, 2.0]), np.array([1.0, 2.0]), max_iter=5, tol=1e-14)
    ok = np.allclose(state.iterate, [1.0, 1.0], atol=1e-12) and state.iterations <= 2
    state2 = cgne_solve(np.array([[1.0, 1.0]]), np.array([2.0]), max_iter=5, tol=1e-14)
    ok &= np.allclose(state2.iterate, [1.0, 1.0], atol=1e-12)
    record("cgne exact solves", bool(ok), "diagonal and minimum-norm cases")

    # separability dichotomy
    pairh = reference_pair()
    th0 = pairh.first.theta0
    s = pair_orientation(pairh)
    r1_axis = np.linspace(th0 + math.pi + 0.02, th0 + 1.45 * math.pi, 60)
    r2_axis = np.linspace(th0 + 0.55 * math.pi, th0 + math.pi - 0.02, 60)
    L0, _ = expo_surface(r1_axis, r2_axis, 0.0, pairh.first.vertex_xy, pairh.second.vertex_xy, orientation=s)
    rep0 = separability_test(L0, r1_axis, r2_axis)
    Lm, _ = expo_surface(r1_axis, r2_axis, ATTENUATION_MU, pairh.first.vertex_xy, pairh.second.vertex_xy, orientation=s)
    repm = separability_test(Lm, r1_axis, r2_axis)
    ok = rep0.verdict == "separable" and repm.verdict == "non-separable"
    record("separability dichotomy", ok, f"mu=0 {rep0.verdict}, mu={ATTENUATION_MU} {repm.verdict}")

    # closed form G equals the double difference of the log surface
    from .consistency import expo_lhs_log

    worst = 0.0
    v1 = pairh.first.vertex_xy
    v2 = pairh.second.vertex_xy
    for _ in range(500):
        a = th0 + math.pi + rng.uniform(0.05, 0.45 * math.pi) * np.ones(2)
        a[1] = th0 + math.pi + rng.uniform(0.05, 0.45 * math.pi)
        b = th0 + math.pi - rng.uniform(0.05, 0.45 * math.pi) * np.ones(2)
        b[1] = th0 + math.pi - rng.uniform(0.05, 0.45 * math.pi)
        gval = float(eval_G(a[0], a[1], b[0], b[1], ATTENUATION_MU, v2 - v1))
        terms = [
            float(expo_lhs_log(x, y, ATTENUATION_MU, v1, v2))
            for x, y in ((a[0], b[0]), (a[1], b[0]), (a[0], b[1]), (a[1], b[1]))
        ]
        dd = terms[0] - terms[1] - terms[2] + terms[3]
        # cancellation scale: nearby angles make the difference tiny while
        # the four terms stay order one
        scale = max(1.0, abs(gval), sum(abs(t) for t in terms))
        worst = max(worst, abs(gval - dd) / scale)
    record("closed-form double difference", worst < 1e-12, f"worst relative {worst:.3e}")

    return lines, ok_all


def cmd_verify(args) -> int:
    lines, ok = _verify_lines()
    text = "\n".join(lines) + f"\nverify: {'ALL PASS' if ok else 'FAILURES PRESENT'}\n"
    outdir = Path(args.out) if args.out else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    _emit(text, outdir, "verify.txt")
    return 0 if ok else 1


# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default=None, help="INI config file (all keys optional)")
    sub.add_argument("--out", default="out", help="output directory (default: ./out)")
    sub.add_argument("--seed", type=int, default=20240501, help="seed for generated phantoms")
    sub.add_argument(
        "--threads",
        type=int,
        default=None,
        help="best-effort cap on numpy BLAS threads (results do not depend on it)",
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="projpair", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("project", help="forward-project a phantom")
    _add_common(p)
    p.add_argument("--mode", choices=["continuous", "discrete"], default=None)
    p.set_defaults(func=cmd_project)

    p = subs.add_parser("check", help="range-condition check on a data pair")
    _add_common(p)
    p.add_argument("--tol", type=float, default=None, help="relative consistency tolerance")
    p.set_defaults(func=cmd_check)

    p = subs.add_parser("separability", help="test the exponential fan-fan surface")
    _add_common(p)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.set_defaults(func=cmd_separability)

    p = subs.add_parser("solve", help="CGNE solve of the discrete pair system")
    _add_common(p)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(func=cmd_solve)

    p = subs.add_parser("verify", help="run the built-in invariant battery")
    p.add_argument("--out", default=None, help="optional output directory for verify.txt")
    p.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    threads = getattr(args, "threads", None)
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)
    try:
        return args.func(args)
    except ProjPairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
