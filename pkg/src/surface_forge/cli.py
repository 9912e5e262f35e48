"""Scenario-driven command line: generate, verify, sweep, theta-eval, pvi-roundtrip.

Exit codes: 0 when every residual is within tolerance, 2 for invalid input,
3 for numeric failures (a residual over tolerance or an error raised by a
module; the report names the module).
"""

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import bonnetfam as bf
from . import bonnetpair as bp
from . import frameflow as ff
from . import thetagap as tg
from . import weierstrass as ws
from .errors import SurfaceForgeError
from .quatgeo import (ComplexGrid, SurfaceGrid, estimate_fundamental_data, gauss_codazzi_residual,
                      gauss_curvature, surface_residuals)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3
SEED_ENV = "SURFACE_FORGE_SEED"
MESH_ORDER = 4

# --- schemas ---------------------------------------------------------------------

_num = {"type": "number"}
_cplx = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_grid = {
    "type": "object",
    "properties": {"nx": {"type": "integer", "minimum": 1}, "ny": {"type": "integer", "minimum": 1},
                   "h": {"type": "number", "exclusiveMinimum": 0}, "center": _cplx},
    "required": ["nx", "ny", "h"],
    "additionalProperties": False,
}
_common = {"kind": {"type": "string"}, "name": {"type": "string"}, "grid": _grid,
           "tol": {"oneOf": [_num, {"type": "object", "additionalProperties": _num}]},
           "order": {"type": "integer", "minimum": 2}}


def _schema(props, required=()):
    p = dict(_common)
    p.update(props)
    return {"type": "object", "properties": p, "required": ["kind"] + list(required),
            "additionalProperties": False}


SCHEMAS = {
    "cmc-vacuum": _schema({"t": _num}, ["grid"]),
    "cmc-finitegap": _schema({"branch_points": {"type": "array", "items": _cplx, "minItems": 1},
                              "D": {"type": "array", "items": _num}, "t0": _num,
                              "sheet": {"enum": [1, -1]}, "truncation": {"type": "integer", "minimum": 1}},
                             ["grid", "branch_points"]),
    "bonnet-family": _schema({"type": {"enum": list(bf.TAGS)}, "J": {"type": "integer", "minimum": 0},
                              "t0": _num, "x0": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                              "H0": _num, "H0'": _num, "H0''": _num, "H_origin": _num,
                              "chart": {"type": "object",
                                        "properties": {"w_min": _cplx, "w_max": _cplx,
                                                       "n": {"oneOf": [{"type": "integer", "minimum": 1},
                                                                       {"type": "array", "minItems": 2, "maxItems": 2,
                                                                        "items": {"type": "integer", "minimum": 1}}]}},
                                        "required": ["w_min", "w_max", "n"], "additionalProperties": False},
                              "T_values": {"type": "array", "items": _num, "minItems": 1},
                              "rtol": {"type": "number", "exclusiveMinimum": 0}},
                             ["type", "H0", "H0'", "chart"]),
    "bonnet-pair": _schema({"surface": {"oneOf": [
        {"enum": ["cylinder"]},
        {"type": "object", "properties": {"nx": {"type": "integer", "minimum": 1},
                                          "ny": {"type": "integer", "minimum": 1},
                                          "h": {"type": "number", "exclusiveMinimum": 0},
                                          "center": _cplx,
                                          "f": {"type": "array", "items": {"type": "array", "items": _num,
                                                                           "minItems": 4, "maxItems": 4}}},
         "required": ["nx", "ny", "h", "f"], "additionalProperties": False}]}},
        ["surface"]),
    "weierstrass": _schema({"fixture": {"enum": ["enneper"]},
                            "s1": {"type": "array", "items": {"oneOf": [_num, _cplx]}},
                            "s2": {"type": "array", "items": {"oneOf": [_num, _cplx]}}}, ["grid"]),
}

DEFAULT_TOL = {
    "cmc-vacuum": {"gauss": 1e-6, "codazzi": 1e-6, "conformality": 1e-8, "H-equality": 1e-6},
    "cmc-finitegap": {"sinh-gordon": 1e-5, "u-imag": 1e-10, "H-equality": 1e-3, "conformality": 1e-6},
    "bonnet-family": {"gauss": 1e-6, "codazzi": 1e-6, "H-equality": 1e-6, "curvature": 1e-6,
                      "isometry": 1e-6, "closedness": 1e-6, "first-integral": 1e-8},
    "bonnet-pair": {"isometry": 1e-8, "modulus": 1e-8, "H-equality": 1e-4, "holomorphy": 1e-6,
                    "closedness": 1e-6, "alpha-imag": 1e-8, "conformality": 1e-8},
    "weierstrass": {"dirac": 1e-6, "closedness": 1e-6, "conformality": 1e-8, "metric": 1e-8},
}
ORDER = {"cmc-vacuum": 8, "cmc-finitegap": 4, "bonnet-family": 8, "bonnet-pair": 8, "weierstrass": 4}
MODULE = {"cmc-vacuum": "frameflow", "cmc-finitegap": "thetagap", "bonnet-family": "bonnetfam",
          "bonnet-pair": "bonnetpair", "weierstrass": "weierstrass"}


class InvalidInput(Exception):
    pass


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidInput(f"cannot read {path}: {e}") from None


def validate(sc):
    if not isinstance(sc, dict) or sc.get("kind") not in SCHEMAS:
        raise InvalidInput(f"unknown scenario kind {sc.get('kind') if isinstance(sc, dict) else sc!r}")
    try:
        jsonschema.validate(sc, SCHEMAS[sc["kind"]])
    except jsonschema.ValidationError as e:
        raise InvalidInput(f"scenario invalid: {e.message}") from None
    return sc


def parse_grid_flag(text):
    try:
        nx, ny, h = text.split(",")
        g = {"nx": int(nx), "ny": int(ny), "h": float(h)}
    except ValueError:
        raise InvalidInput(f"--grid expects nx,ny,h, got {text!r}") from None
    if g["nx"] < 1 or g["ny"] < 1 or not g["h"] > 0:
        raise InvalidInput("grid needs nx, ny >= 1 and h > 0")
    return g


def grid_from_spec(spec):
    c = spec.get("center", [0.0, 0.0])
    return ComplexGrid.centered(spec["nx"], spec["ny"], spec["h"], complex(c[0], c[1]))


def tolerances(sc, override=None):
    tol = dict(DEFAULT_TOL[sc["kind"]])
    given = sc.get("tol")
    if isinstance(given, dict):
        tol.update(given)
    elif given is not None:
        tol = {k: float(given) for k in tol}
    if override is not None:
        tol = {k: float(override) for k in tol}
    return tol


# --- OBJ ---------------------------------------------------------------------------

def write_obj(path, F, grid):
    """Vertices in [ix, iy] row-major order, quad faces, grid header comment."""
    F = np.asarray(F, float)
    nx, ny = F.shape[:2]
    out = io.StringIO()
    out.write("# surface-forge mesh\n")
    out.write("# grid %d %d %.17g %.17g %.17g %.17g\n" % (nx, ny, grid.hx, grid.hy, grid.z0.real, grid.z0.imag))
    for p in F.reshape(-1, 3):
        out.write("v %.17g %.17g %.17g\n" % tuple(p))
    for i in range(nx - 1):
        for j in range(ny - 1):
            a = i * ny + j + 1
            out.write("f %d %d %d %d\n" % (a, a + ny, a + ny + 1, a + 1))
    Path(path).write_text(out.getvalue())


def read_obj(path):
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise InvalidInput(f"cannot read {path}: {e}") from None
    head = [ln.split() for ln in lines if ln.startswith("# grid")]
    if not head:
        raise InvalidInput("OBJ lacks the '# grid' header")
    try:
        _, _, nx, ny, hx, hy, x0, y0 = head[0]
        nx, ny = int(nx), int(ny)
        verts = np.array([[float(v) for v in ln.split()[1:4]] for ln in lines if ln.startswith("v ")])
        grid = ComplexGrid(complex(float(x0), float(y0)), float(hx), float(hy), nx, ny)
    except (ValueError, SurfaceForgeError) as e:
        raise InvalidInput(f"malformed OBJ: {e}") from None
    if verts.shape != (nx * ny, 3):
        raise InvalidInput("vertex count does not match the grid header")
    return verts.reshape(nx, ny, 3), grid


# --- residual bookkeeping -----------------------------------------------------------

def _entry(value, tol):
    v = float(value)
    if not np.isfinite(v) or v < 0:
        raise FloatingPointError(f"non-finite residual {v}")
    return {"max": v, "tol": tol, "pass": bool(v <= tol)}


def mesh_section(F, grid):
    """Residuals recomputed from vertex positions alone (what verify sees)."""
    s = SurfaceGrid(F=np.asarray(F, float), grid=grid)
    m = MESH_ORDER // 2
    try:
        fd = estimate_fundamental_data(s, order=MESH_ORDER)
        gc = gauss_codazzi_residual(fd, order=MESH_ORDER)
        sr = surface_residuals(s, order=MESH_ORDER)
    except SurfaceForgeError as e:
        return {"error": str(e)}
    cut = lambda a: float(np.max(np.abs(a[m:-m, m:-m]))) if min(grid.nx, grid.ny) > 2 * m else 0.0
    return {"gauss": gc.gauss_max, "codazzi": gc.codazzi_max, "conformality": sr["conformality"],
            "H_max_abs": cut(fd.H), "Q_max_abs": cut(fd.Q), "order": MESH_ORDER}


def _interior_max(a, m):
    return float(np.max(np.abs(a[m:-m, m:-m])))


# --- pipelines --------------------------------------------------------------------------

def _estimate(surf, order):
    fd = estimate_fundamental_data(surf, order=order)
    return fd, gauss_codazzi_residual(fd, order=order)


def run_cmc_vacuum(sc, grid, order):
    t = float(sc.get("t", 0.0))
    Phi, Phi_t = ff.vacuum_frame(grid.z, t)
    surf = ff.sym_immersion(Phi, Phi_t, grid)
    fd, gc = _estimate(surf, order)
    m = order // 2
    res = {"gauss": gc.gauss_max, "codazzi": gc.codazzi_max,
           "conformality": surface_residuals(surf, order)["conformality"],
           "H-equality": _interior_max(fd.H - 1, m)}
    return {"main": surf}, res, {}


def run_cmc_finitegap(sc, grid, order):
    sd = tg.spectral_data_from_json({"branch_points": sc["branch_points"], "D": sc.get("D"),
                                     "truncation": sc.get("truncation")})
    u, ui = tg.sinh_gordon_u(grid.z, sd, return_imag=True)
    from . import _fd
    r = _fd.dzdzbar(u, grid.hx, grid.hy, order) + np.sinh(u)
    surf = tg.finite_gap_surface(sd, grid, float(sc.get("t0", 0.3)), int(sc.get("sheet", 1)))
    fd, _ = _estimate(surf, order)
    m = order // 2
    res = {"sinh-gordon": _interior_max(r, m), "u-imag": float(np.max(np.abs(ui))),
           "H-equality": _interior_max(fd.H - 1, m),
           "conformality": surface_residuals(surf, order)["conformality"]}
    return {"main": surf}, res, {}


def _chart(sc):
    c = sc["chart"]
    n = c["n"]
    nx, ny = (n, n) if isinstance(n, int) else n
    a, b = complex(*c["w_min"]), complex(*c["w_max"])
    hx = (b.real - a.real) / (nx - 1) if nx > 1 else 1.0
    hy = (b.imag - a.imag) / (ny - 1) if ny > 1 else hx
    return ComplexGrid(a, hx, hy, nx, ny)


def family_solution(sc, grid):
    ht = bf.HazzidakisType.parse(sc["type"], sc.get("J"))
    rtol = float(sc.get("rtol", 1e-10))
    if ht.tag == "BV":
        smax = float(np.max(np.abs(grid.z)) ** 2)
        return bf.bv_series_solve(ht.J, float(sc.get("H_origin", 0.0)), sc["H0'"],
                                  s_end=min(0.9999, max(smax, 0.01) * 1.0001 + 1e-9), rtol=rtol), ht
    if "x0" in sc:
        x = float(sc["x0"])
        t0 = -np.log(x) / 4
        Hx, Hxx = sc["H0'"], sc.get("H0''", 0.0)
        H1, H2 = -4 * x * Hx, 16 * x * x * Hxx + 16 * x * Hx
    else:
        t0 = float(sc.get("t0", 1.0))
        H1, H2 = sc["H0'"], sc.get("H0''", 0.0)
    tt = bf.chart_variable(ht, grid.z)
    lo, hi = min(t0, float(tt.min())), max(t0, float(tt.max()))
    pad = 1e-6 * max(1.0, hi)
    return bf.integrate_hazzidakis(ht, t0, sc["H0"], H1, H2, (lo - pad, hi + pad), rtol=rtol), ht


def run_bonnet_family(sc, grid, order):
    sol, ht = family_solution(sc, grid)
    Ts = sc.get("T_values", [0.0])
    surfs, res, first = {}, {}, None
    worst = lambda k, v: res.__setitem__(k, max(res.get(k, 0.0), float(v)))
    m = order // 2
    for i, T in enumerate(Ts):
        s = bf.build_bonnet_surface(ht, sol, T, grid)
        surfs[f"T{i}"] = s
        fd, gc = _estimate(s, order)
        ex = bf.bonnet_fundamental_data(ht, sol, T, grid)
        Kx = gauss_curvature(ex.u, ex.Q, ex.H)
        worst("gauss", gc.gauss_max)
        worst("codazzi", gc.codazzi_max)
        worst("H-equality", _interior_max(fd.H - ex.H, m))
        worst("curvature", _interior_max(gauss_curvature(fd.u, fd.Q, fd.H) - Kx, m))
        worst("closedness", s.meta["path_defect"])
        if first is None:
            first = fd
            res.setdefault("isometry", 0.0)
        else:
            worst("isometry", max(_interior_max(fd.u - first.u, m), _interior_max(fd.H - first.H, m)))
    if ht.tag == "B":
        xc = bf.to_x_coordinates(sol)
        th2 = bf.first_integral(xc.x, xc.H, xc.Hx, xc.Hxx)
        res["first-integral"] = float(np.max(np.abs(th2 - sol.theta2)))
    return surfs, res, {"solution": sol.to_dict()}


CYLINDER_GRID = {"nx": 41, "ny": 41, "h": 1e-2, "center": [0.3, 0.2]}


def _pair_input(sc, grid):
    s = sc["surface"]
    if s == "cylinder":
        return bp.cylinder_fixture(grid if grid is not None else grid_from_spec(CYLINDER_GRID))
    f = np.asarray(s["f"], float)
    if f.shape[0] != s["nx"] * s["ny"]:
        raise InvalidInput("sampled surface size does not match nx*ny")
    g = grid_from_spec({k: s[k] for k in ("nx", "ny", "h", "center") if k in s})
    return bp.QuatSurface(f.reshape(s["nx"], s["ny"], 4), g)


def run_bonnet_pair(sc, grid, order):
    R = _pair_input(sc, grid)
    g = R.grid
    F1, F2 = bp.bonnet_pair_from_isothermic(R, order=order)
    fd1, _ = _estimate(F1, order)
    fd2, _ = _estimate(F2, order)
    m = order // 2
    dec = bp.decompose_hopf(fd1.Q, fd2.Q)
    s1, s2 = surface_residuals(F1, order), surface_residuals(F2, order)
    res = {"isometry": _interior_max(np.exp(fd1.u) - np.exp(fd2.u), m),
           "modulus": _interior_max(np.abs(fd1.Q) - np.abs(fd2.Q), m),
           "H-equality": _interior_max(fd1.H - fd2.H, m),
           "holomorphy": bp.holomorphy_residual(dec.h, g, order),
           "closedness": max(F1.meta["path_defect"], F2.meta["path_defect"]),
           "alpha-imag": dec.max_imag,
           "conformality": max(s1["conformality"], s2["conformality"])}
    info = {"noncongruence_min": float(np.min(np.abs(fd1.Q - fd2.Q)[m:-m, m:-m]))}
    return {"F1": F1, "F2": F2}, res, info


def _poly(coeffs):
    c = np.array([complex(*a) if isinstance(a, (list, tuple)) else complex(a) for a in coeffs])
    return lambda z: np.polynomial.polynomial.polyval(z, c)


def run_weierstrass(sc, grid, order):
    if sc.get("fixture", "enneper") == "enneper" and "s1" not in sc:
        f1, f2 = (lambda z: np.ones_like(z)), (lambda z: z)
    else:
        f1, f2 = _poly(sc.get("s1", [1])), _poly(sc.get("s2", [0, 1]))
    sp = ws.SpinorPair.from_functions(f1, f2, grid)
    surf = ws.weierstrass_integrate(sp, tol=np.inf)
    fd, _ = _estimate(surf, order)
    m = order // 2
    res = {"dirac": ws.dirac_residual(sp, 0.0, order).max, "closedness": surf.meta["path_defect"],
           "conformality": surface_residuals(surf, order)["conformality"],
           "metric": _interior_max(np.exp(fd.u) - ws.metric_from_spinors(sp), m)}
    return {"main": surf}, res, {}


PIPELINES = {"cmc-vacuum": run_cmc_vacuum, "cmc-finitegap": run_cmc_finitegap,
             "bonnet-family": run_bonnet_family, "bonnet-pair": run_bonnet_pair,
             "weierstrass": run_weierstrass}


def scenario_grid(sc, grid_flag=None):
    if sc["kind"] == "bonnet-family":
        g = _chart(sc)
        if grid_flag is not None:
            gf = parse_grid_flag(grid_flag)
            g = ComplexGrid.centered(gf["nx"], gf["ny"], gf["h"], g.z0 + ((g.nx - 1) * g.hx + 1j * (g.ny - 1) * g.hy) / 2)
        return g
    spec = dict(sc.get("grid", {}))
    if grid_flag is not None:
        spec.update(parse_grid_flag(grid_flag))
    if sc["kind"] == "bonnet-pair" and not spec:
        return None
    if not spec:
        raise InvalidInput("scenario needs a grid")
    return grid_from_spec(spec)


def run_scenario(sc, tol=None, grid_flag=None, timing=False):
    """(surfaces, report) for a validated scenario; errors become report entries."""
    kind = sc["kind"]
    grid = scenario_grid(sc, grid_flag)
    order = int(sc.get("order", ORDER[kind]))
    tols = tolerances(sc, tol)
    report = {"kind": kind, "name": sc.get("name", kind), "version": __version__, "order": order}
    t0 = time.perf_counter()
    try:
        surfs, res, info = PIPELINES[kind](sc, grid, order)
    except SurfaceForgeError as e:
        report["error"] = {"module": e.module, "type": type(e).__name__, "message": str(e)}
        report["pass"] = False
        return {}, report
    except (FloatingPointError, np.linalg.LinAlgError) as e:
        report["error"] = {"module": MODULE[kind], "type": type(e).__name__, "message": str(e)}
        report["pass"] = False
        return {}, report
    g = next(iter(surfs.values())).grid
    report["grid"] = g.to_dict()
    report["residuals"] = {k: _entry(v, tols.get(k, np.inf)) for k, v in sorted(res.items())}
    report["info"] = info
    report["mesh"] = {k: mesh_section(s.F, s.grid) for k, s in surfs.items()}
    report["pass"] = all(r["pass"] for r in report["residuals"].values())
    if not report["pass"]:
        report["failing_module"] = MODULE[kind]
    if timing:
        report["runtime_s"] = time.perf_counter() - t0
    return surfs, report


def dump(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonify) + "\n"


def _jsonify(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o))


# --- commands ----------------------------------------------------------------------

def _stem(args, sc):
    return sc.get("name") or Path(args.scenario).stem


def cmd_generate(args):
    sc = validate(load_json(args.scenario))
    surfs, report = run_scenario(sc, args.tol, args.grid, args.timing)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = _stem(args, sc)
    for key, s in surfs.items():
        name = stem if key == "main" else f"{stem}_{key}"
        write_obj(out / f"{name}.obj", s.F, s.grid)
    (out / f"{stem}.json").write_text(dump(report))
    sys.stdout.write(dump(report))
    return EXIT_OK if report["pass"] else EXIT_NUMERIC


def cmd_verify(args):
    path = args.input
    if str(path).endswith(".obj"):
        F, grid = read_obj(path)
        if args.noise:
            rng = np.random.default_rng(int(os.environ.get(SEED_ENV, "0")))
            F = F + args.noise * rng.standard_normal(F.shape)
        report = {"input": Path(path).name, "grid": grid.to_dict(), "mesh": mesh_section(F, grid)}
        if args.noise:
            report["noise"] = args.noise
        code = EXIT_NUMERIC if "error" in report["mesh"] else EXIT_OK
    else:
        sc = validate(load_json(path))
        _, report = run_scenario(sc, args.tol, args.grid, args.timing)
        code = EXIT_OK if report["pass"] else EXIT_NUMERIC
    text = dump(report)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / (Path(path).stem + ".verify.json")).write_text(text)
    sys.stdout.write(text)
    return code


SWEEP_PARAMS = {"t": ("cmc-vacuum", "t"), "T": ("bonnet-family", "T_values"),
                "lambda0": ("cmc-finitegap", "t0"), "D": ("cmc-finitegap", "D")}


def _sweep_fields(sc, surfs, order):
    fd = estimate_fundamental_data(next(iter(surfs.values())), order=order)
    return fd.u, fd.H


def cmd_sweep(args):
    sc = validate(load_json(args.scenario))
    if args.param not in SWEEP_PARAMS:
        raise InvalidInput(f"unknown sweep parameter {args.param!r}")
    kind, key = SWEEP_PARAMS[args.param]
    if sc["kind"] != kind:
        raise InvalidInput(f"parameter {args.param} needs a {kind} scenario")
    values = [v for v in args.values.split(";" if ";" in args.values else ",") if v.strip()]
    if not values:
        raise InvalidInput("no sweep values")

    def one(v):
        s = dict(sc)
        if key == "T_values":
            s[key] = [float(v)]
        elif key == "D":
            s[key] = [float(a) for a in v.split(",")]
        else:
            s[key] = float(v)
        surfs, rep = run_scenario(s, args.tol, args.grid)
        fields = _sweep_fields(s, surfs, rep["order"]) if surfs else None
        return v, rep, fields

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as ex:
        rows = list(ex.map(one, values))
    names = sorted({k for _, r, _ in rows for k in r.get("residuals", {})})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([args.param, "u_delta", "H_delta", "pass"] + names)
    ref = rows[0][2]
    ok = True
    for v, rep, fields in rows:
        m = rep["order"] // 2
        if fields is None or ref is None:
            du = dH = float("nan")
        else:
            du = _interior_max(fields[0] - ref[0], m)
            dH = _interior_max(fields[1] - ref[1], m)
        ok &= rep["pass"]
        w.writerow([v, "%.17g" % du, "%.17g" % dH, int(rep["pass"])]
                   + ["%.17g" % rep["residuals"][n]["max"] if n in rep.get("residuals", {}) else "" for n in names])
    text = buf.getvalue()
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / f"{_stem(args, sc)}_sweep_{args.param}.csv").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_theta_eval(args):
    out = {}
    if args.scenario:
        obj = load_json(args.scenario)
        if "branch_points" not in obj:
            raise InvalidInput("theta-eval scenario needs branch_points")
        try:
            sd = tg.spectral_data_from_json(obj)
        except (ValueError, KeyError, TypeError) as e:
            raise InvalidInput(str(e)) from None
        B = sd.B
        out.update({"genus": sd.genus, "B": B, "U": sd.U})
    elif args.B is not None:
        B = np.atleast_2d(np.asarray(json.loads(args.B), float))
    else:
        raise InvalidInput("theta-eval needs --scenario or --B")
    g = B.shape[0]
    u = np.zeros(g, complex) if args.u is None else np.asarray(json.loads(args.u), float)
    if args.u is not None and u.ndim == 2 and u.shape[-1] == 2:
        u = u[:, 0] + 1j * u[:, 1]
    u = np.asarray(u, complex).reshape(-1)
    if u.shape != (g,):
        raise InvalidInput("u must have one entry per handle")
    out["u"] = u
    out["theta"] = complex(tg.theta(u, B))
    sys.stdout.write(dump({k: (v if not isinstance(v, np.ndarray) or not np.iscomplexobj(v)
                               else np.stack([v.real, v.imag], -1)) for k, v in out.items()}))
    return EXIT_OK


def cmd_pvi_roundtrip(args):
    sc = {"t0": 1.0, "H0": 0.5, "H0'": -1.0, "H0''": 0.7, "interval": [0.3, 2.0], "points": 20}
    if args.scenario:
        sc.update(load_json(args.scenario))
    tol = 1e-8 if args.tol is None else args.tol
    try:
        a, b = sc["interval"]
        sol = bf.integrate_hazzidakis("B", sc["t0"], sc["H0"], sc["H0'"], sc["H0''"], (a, b), rtol=1e-12)
        xc = bf.to_x_coordinates(sol)
        drift = float(np.max(np.abs(bf.first_integral(xc.x, xc.H, xc.Hx, xc.Hxx) - sol.theta2)))
        tq = np.linspace(a, b, int(sc["points"]) + 2)[1:-1]
        X = bf.to_x_coordinates(sol, tq)
        th = np.sqrt(complex(sol.theta2))
        th = th.real if th.imag == 0 else th
        rt, pv = 0.0, 0.0
        for sign in (1, -1):
            y, y1, y2 = bf.H_to_y_jet(X.x, X.H, X.Hx, X.Hxx, sign * th)
            rt = max(rt, float(np.max(np.abs(bf.y_to_H(y, y1, X.x, sign * th) - X.H))))
            pv = max(pv, float(np.max(bf.pvi_residual(y, y1, y2, X.x, sign * th))))
    except SurfaceForgeError as e:
        sys.stdout.write(dump({"error": {"module": e.module, "message": str(e)}, "pass": False}))
        return EXIT_NUMERIC
    res = {"first-integral": _entry(drift, tol), "roundtrip": _entry(rt, tol), "pvi": _entry(pv, 1e-6)}
    rep = {"kind": "pvi-roundtrip", "theta2": sol.theta2, "residuals": res,
           "pass": all(r["pass"] for r in res.values())}
    text = dump(rep)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "pvi_roundtrip.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if rep["pass"] else EXIT_NUMERIC


def build_parser():
    p = argparse.ArgumentParser(prog="surface-forge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(q, scenario_required=True):
        if scenario_required:
            q.add_argument("--scenario", required=True)
        q.add_argument("--out", default=None)
        q.add_argument("--tol", type=float, default=None)
        q.add_argument("--grid", default=None, help="nx,ny,h")
        q.add_argument("--threads", type=int, default=1)
        q.add_argument("--timing", action="store_true", help="add runtimes to reports")

    g = sub.add_parser("generate", help="build a surface, write OBJ and a JSON report")
    common(g)
    v = sub.add_parser("verify", help="recompute residuals for an OBJ mesh or a scenario")
    v.add_argument("input")
    v.add_argument("--noise", type=float, default=0.0, help="seeded vertex noise for sensitivity runs")
    common(v, scenario_required=False)
    s = sub.add_parser("sweep", help="one report row per parameter value (CSV)")
    common(s)
    s.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    s.add_argument("--values", required=True, help="comma separated, or ';' separated D vectors")
    t = sub.add_parser("theta-eval", help="theta function and period queries")
    common(t, scenario_required=False)
    t.add_argument("--scenario", default=None)
    t.add_argument("--B", default=None, help="JSON real period matrix")
    t.add_argument("--u", default=None, help="JSON argument vector, entries real or [re, im]")
    r = sub.add_parser("pvi-roundtrip", help="type B Hazzidakis <-> Painleve VI checks")
    common(r, scenario_required=False)
    r.add_argument("--scenario", default=None)
    return p


COMMANDS = {"generate": cmd_generate, "verify": cmd_verify, "sweep": cmd_sweep,
            "theta-eval": cmd_theta_eval, "pvi-roundtrip": cmd_pvi_roundtrip}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    if args.threads < 1:
        sys.stderr.write("error: --threads must be >= 1\n")
        return EXIT_INVALID
    try:
        return COMMANDS[args.cmd](args)
    except InvalidInput as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    except SurfaceForgeError as e:
        sys.stderr.write(f"error in {e.module}: {e}\n")
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError) as e:
        sys.stderr.write(f"error: invalid input: {e}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
