"""Command line entry point.

    python3 -m pucci_asym <subcommand> [--config FILE] [--set a.b=VALUE ...] [--out DIR]

Each subcommand starts from built-in defaults, merges the JSON config and
then the dotted overrides.  Outputs go to --out (with a manifest.json that
echoes the resolved config and the artifact checksums); without --out the
main JSON result is printed.  Exit status: 0 success, 2 invalid input,
3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import importlib
import json
import logging
import math
import os
import sys

import numpy as np

pucci = importlib.import_module(__package__ + ".pucci")
from . import asym, fd, geometry, radial, special
from .errors import ConfigurationError, FitError, InputError, SolverError

log = logging.getLogger("pucci_asym")

DEFAULTS = {
    "special": {"which": "g", "a": 1.0, "b": 1.0, "sigma": [1.0]},
    "radial": {"kind": "ball", "R": 1.0, "eps": 0.1, "lam": 1.0, "Lam": 2.0, "dim": 2,
               "r": None, "n_r": 11},
    "solve-elliptic": {"domain": {"shape": "ball", "center": [0.0, 0.0], "R": 1.0},
                       "sign": "minus", "eps": 0.1, "lam": 1.0, "Lam": 2.0, "grid": {}},
    "solve-parabolic": {"domain": {"shape": "ball", "center": [0.0, 0.0], "R": 1.0},
                        "sign": "minus", "t_final": 0.05, "snapshots": [], "lam": 1.0,
                        "Lam": 2.0, "grid": {}},
    "varadhan": {"kind": "elliptic", "domain": {"shape": "ball", "center": [0.0, 0.0], "R": 1.0},
                 "sign": "minus", "lam": 1.0, "Lam": 2.0, "dim": 2, "probes": [[0.0, 0.0]],
                 "sequence": {"start": 0.125, "ratio": 0.5, "count": 10}, "source": "radial",
                 "models": ["eps_log_eps"], "psi_modulus": None, "two_term": False, "grid": {}},
    "qmean": {"kind": "elliptic", "domain": {"shape": "rectangle", "box": [-2.0, 0.0, 2.0, 3.0]},
              "x": [0.0, 1.0], "sign": "minus", "lam": 1.0, "Lam": 1.0, "q": [2.0, "inf"],
              "sequence": [0.25, 0.125, 0.0625], "grid": {"frames": "axis"}, "order": None},
    "constants": {"N": 2, "q": 2.0},
    "selftest": {"seed": 0, "samples": 2000},
}


# ---------------------------------------------------------------- config plumbing


def config_command(path):
    """Subcommand named by a config file's "command" field."""
    if not path:
        raise ConfigurationError("run needs --config")
    try:
        with open(path) as fh:
            cmd = json.load(fh).get("command")
    except (OSError, json.JSONDecodeError, AttributeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    if cmd not in COMMANDS:
        raise ConfigurationError(f"config names unknown command {cmd!r}")
    return cmd


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def set_dotted(cfg, path, value):
    keys = path.split(".")
    node = cfg
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            node[k] = {}
        node = node[k]
    node[keys[-1]] = value


def merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = v
    return out


def resolve_config(cmd, config_path=None, overrides=()):
    cfg = copy.deepcopy(DEFAULTS[cmd])
    if config_path:
        try:
            with open(config_path) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {config_path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigurationError("config must be a JSON object")
        loaded.pop("command", None)
        cfg = merge(cfg, loaded)
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} must look like key.path=value")
        k, v = item.split("=", 1)
        set_dotted(cfg, k.strip(), _parse_value(v))
    return cfg


def _q(v):
    if isinstance(v, str) and v.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return float(v)
    except (TypeError, ValueError):
        raise ConfigurationError(f"q must be a number or 'inf', got {v!r}") from None


def _num(cfg, key, positive=False):
    try:
        v = float(cfg[key])
    except (KeyError, TypeError, ValueError):
        raise ConfigurationError(f"field {key!r} must be a number") from None
    if not math.isfinite(v) or (positive and not v > 0):
        raise ConfigurationError(f"field {key!r} must be {'positive' if positive else 'finite'}, got {v!r}")
    return v


def _params(cfg):
    return pucci.PucciParams(_num(cfg, "lam"), _num(cfg, "Lam"), int(cfg.get("dim", 2)))


def _grid_cfg(d):
    if not isinstance(d, dict):
        raise ConfigurationError("grid must be an object")
    allowed = set(fd.GridConfig.__dataclass_fields__)
    bad = set(d) - allowed
    if bad:
        raise ConfigurationError(f"unknown grid fields: {sorted(bad)}")
    d = dict(d)
    if d.get("box") is not None:
        d["box"] = tuple(d["box"])
    return fd.GridConfig(**d)


def _sequence(spec):
    if isinstance(spec, dict):
        start = float(spec["start"])
        ratio = float(spec.get("ratio", 0.5))
        count = int(spec["count"])
        if not (0 < ratio < 1 and count >= 1 and start > 0):
            raise ConfigurationError("sequence needs start > 0, 0 < ratio < 1, count >= 1")
        seq = [start * ratio ** k for k in range(count)]
    else:
        seq = [float(v) for v in spec]
    if any(not s > 0 for s in seq) or any(b >= a for a, b in zip(seq, seq[1:])):
        raise ConfigurationError("sequence must be positive and strictly decreasing")
    return seq


# ---------------------------------------------------------------- output


def dumps(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


class Output:
    """Collects artifacts for one run and writes the manifest."""

    def __init__(self, out_dir, cmd, cfg):
        self.dir = out_dir
        self.cmd = cmd
        self.cfg = cfg
        self.files = []
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        self.files.append(name)
        return os.path.join(self.dir, name)

    def json(self, name, obj):
        if not self.dir:
            sys.stdout.write(dumps(obj))
            return
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(obj))

    def finish(self):
        if not self.dir:
            return
        sums = {}
        for name in sorted(set(self.files)):
            with open(os.path.join(self.dir, name), "rb") as fh:
                sums[name] = hashlib.sha256(fh.read()).hexdigest()
        man = {"command": self.cmd, "config": self.cfg, "artifacts": sums}
        with open(os.path.join(self.dir, "manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(dumps(man))


# ---------------------------------------------------------------- subcommands


def cmd_special(cfg, out):
    which = cfg["which"]
    if which not in ("f", "g"):
        raise ConfigurationError("which must be 'f' or 'g'")
    pp = special.ProfileParams(_num(cfg, "a"), _num(cfg, "b"))
    sig = cfg["sigma"] if isinstance(cfg["sigma"], list) else [cfg["sigma"]]
    sig = [float(s) for s in sig]
    res = []
    for s in sig:
        rep = special.g_profile(s, pp) if which == "g" else special.f_profile(s, pp)
        res.append({"which": which, "a": pp.a, "b": pp.b, "sigma": s, "value": rep.value,
                    "log_value": rep.log_value, "abs_error_estimate": rep.abs_error_estimate,
                    "evaluations": rep.evaluations, "truncation_point": rep.truncation_point})
    if out.dir:
        out.json("special.json", res)
    else:
        for r in res:
            sys.stdout.write(json.dumps(_jsonable(r), sort_keys=True) + "\n")


def cmd_radial(cfg, out):
    p = _params(cfg)
    R, eps = _num(cfg, "R", True), _num(cfg, "eps", True)
    kind = cfg["kind"]
    if kind not in ("ball", "exterior"):
        raise ConfigurationError("kind must be 'ball' or 'exterior'")
    r = cfg.get("r")
    if r is None:
        n = int(cfg.get("n_r", 11))
        r = np.linspace(0.0, R, n) if kind == "ball" else np.linspace(R, 3.0 * R, n)
    table = radial.radial_table(kind, np.asarray(r, float), R, eps, p)
    header = ["r", "log_u_minus", "log_u_plus", "bound_above", "bound_below"]
    if out.dir:
        write_csv(out.path("radial.csv"), header, table.tolist())
        out.json("radial.json", {"columns": header, "rows": table})
    else:
        out.json(None, {"columns": header, "rows": table})


def _field_outputs(out, fld, stem):
    if out.dir:
        fd.write_field_csv(fld, out.path(stem + ".csv"))
        fd.write_field_binary(fld, out.path(stem + ".bin"))


def cmd_solve_elliptic(cfg, out):
    p = _params(cfg)
    dom = geometry.domain_from_dict(cfg["domain"])
    sign = pucci.check_sign(cfg["sign"])
    eps = _num(cfg, "eps", True)
    gcfg = _grid_cfg(cfg.get("grid", {}))
    fld = fd.solve_elliptic(dom, sign, eps, p, gcfg)
    _field_outputs(out, fld, "field")
    rep = fd.residual_report(fld)
    out.json("report.json", {"report": rep.to_dict(), "meta": fld.meta,
                             "grid": {"nx": fld.grid.nx, "ny": fld.grid.ny, "h": fld.grid.h,
                                      "origin": [fld.grid.x0, fld.grid.y0],
                                      "interior_nodes": fld.grid.n}})


def cmd_solve_parabolic(cfg, out):
    p = _params(cfg)
    dom = geometry.domain_from_dict(cfg["domain"])
    sign = pucci.check_sign(cfg["sign"])
    t_final = _num(cfg, "t_final", True)
    gcfg = _grid_cfg(cfg.get("grid", {}))
    snaps = [float(t) for t in cfg.get("snapshots", [])]
    res = fd.solve_parabolic(dom, sign, t_final, p, gcfg, snaps)
    for k, f in enumerate(res.fields):
        _field_outputs(out, f, f"field_{k:03d}")
    out.json("report.json", {"report": res.report.to_dict(), "times": res.times,
                             "grid": {"nx": res.grid.nx, "ny": res.grid.ny, "h": res.grid.h,
                                      "origin": [res.grid.x0, res.grid.y0]}})


def cmd_varadhan(cfg, out):
    p = _params(cfg)
    dom = geometry.domain_from_dict(cfg["domain"])
    sign = pucci.check_sign(cfg["sign"])
    seq = _sequence(cfg["sequence"])
    models = list(cfg.get("models") or [])
    for m in models:
        if m not in asym.RATE_MODELS:
            raise ConfigurationError(f"unknown rate model {m!r}")
    mod = cfg.get("psi_modulus")
    mod = geometry.ModulusOfContinuity.from_dict(mod) if mod else None
    if any("psi" in m for m in models) and mod is None:
        mod = geometry.classify_regularity(dom)
    gcfg = _grid_cfg(cfg.get("grid", {}))
    st = asym.varadhan_sweep(cfg["kind"], dom, sign, cfg["probes"], seq, p,
                             source=cfg.get("source", "radial"), cfg=gcfg, models=models,
                             psi_mod=mod, two_term=bool(cfg.get("two_term", False)))
    if out.dir:
        write_csv(out.path("study.csv"), ["x", "y", "d", "param", "discrepancy"], st.rows())
    out.json("study.json", st.to_dict())


def cmd_qmean(cfg, out):
    p = _params(cfg)
    dom = geometry.domain_from_dict(cfg["domain"])
    sign = pucci.check_sign(cfg["sign"])
    kind = cfg["kind"]
    if kind not in ("elliptic", "parabolic"):
        raise ConfigurationError("kind must be 'elliptic' or 'parabolic'")
    qs = cfg["q"] if isinstance(cfg["q"], list) else [cfg["q"]]
    qs = [_q(v) for v in qs]
    if any(not q > 1 for q in qs):
        raise ConfigurationError("q must exceed 1")
    seq = _sequence(cfg["sequence"])
    contact = geometry.contact_ball(dom, np.asarray(cfg["x"], float))
    gcfg = _grid_cfg(cfg.get("grid", {}))
    order = cfg.get("order")
    order = float(order) if order is not None else (1.0 if kind == "elliptic" else 0.5)
    fn = asym.elliptic_qmean_limit if kind == "elliptic" else asym.parabolic_qmean_limit
    studies = fn(dom, contact, sign, qs, seq, p, gcfg, order=order)
    rows = []
    for q in qs:
        for r in studies[q].results:
            rows.append(["inf" if math.isinf(q) else q, r.param, r.value, r.scaled, r.predicted])
    if out.dir:
        write_csv(out.path("qmean.csv"), ["q", "param", "mu", "scaled", "predicted"], rows)
    out.json("qmean.json", {"contact": {"x": contact.x, "R": contact.R, "z": contact.z_x,
                                        "curvatures": contact.curvatures, "pi0": contact.pi0},
                            "studies": {("inf" if math.isinf(q) else repr(q)): studies[q].to_dict()
                                        for q in qs}})


def cmd_constants(cfg, out):
    N = int(cfg["N"])
    q = _q(cfg["q"])
    out.json("constants.json", {"N": N, "q": q, "c": asym.c_constant(N, q),
                                "C": asym.big_c_constant(N, q)})


def cmd_selftest(cfg, out):
    from .selftest import run_selftest
    res = run_selftest(int(cfg.get("seed", 0)), int(cfg.get("samples", 2000)))
    out.json("selftest.json", res)
    return 0 if res["passed"] else 1


COMMANDS = {
    "special": cmd_special, "radial": cmd_radial, "solve-elliptic": cmd_solve_elliptic,
    "solve-parabolic": cmd_solve_parabolic, "varadhan": cmd_varadhan, "qmean": cmd_qmean,
    "constants": cmd_constants, "selftest": cmd_selftest,
}

# convenience flags mapped onto config leaves
FLAGS = {"--N": "N", "--q": "q", "--eps": "eps", "--sign": "sign", "--seed": "seed",
         "--t-final": "t_final", "--lam": "lam", "--Lam": "Lam", "--which": "which",
         "--sigma": "sigma", "--a": "a", "--b": "b", "--kind": "kind", "--source": "source"}


def build_parser():
    ap = argparse.ArgumentParser(prog="pucci_asym", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS) + ["run"],
                    help="'run' takes the subcommand from the config's \"command\" field")
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config leaf by dotted path (value parsed as JSON)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    for flag, key in FLAGS.items():
        ap.add_argument(flag, dest="flag_" + key, default=None, metavar=key.upper(),
                        help=f"shorthand for --set {key}=VALUE")
    return ap


def run(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = list(args.set)
    for key in FLAGS.values():
        v = getattr(args, "flag_" + key)
        if v is not None:
            overrides.append(f"{key}={v}")
    try:
        cmd = args.command
        if cmd == "run":
            cmd = config_command(args.config)
        cfg = resolve_config(cmd, args.config, overrides)
        out = Output(args.out, cmd, cfg)
        status = COMMANDS[cmd](cfg, out) or 0
        out.finish()
        return status
    except SolverError as exc:
        sys.stderr.write(f"solver error: {exc}\n")
        return 3
    except (InputError, FitError, KeyError, TypeError) as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
