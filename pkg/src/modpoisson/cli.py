"""Command-line front end.

    modpoisson estimate --domain riemann --stat omega --s 1.1 --x 2 --kind upper_tail
    modpoisson oracle --domain riemann --stat omega --s 2 --k-max 10
    modpoisson simulate --domain poly_fq:2 --stat Omega --s 2 --samples 100000 --method degree_then_uniform
    modpoisson compare --domain riemann --stat omega --s 1.5 --samples 1000000 --cutoff 1000000
    modpoisson sweep --target ld --domain riemann --stat omega --x 2 --kind upper_tail --s 1.5 1.2 1.1 1.05
    modpoisson sweep --target be --domain riemann --stat omega --s 1.3 1.1
    modpoisson verify-constants

Every run writes ``report.json`` (schema ``modpoisson.report/v1``) and CSV
tables into ``--out``. Flags override values from ``--config`` (JSON).
"""

import argparse
import dataclasses
import datetime
import json
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytics import berry_esseen_bound, ld_estimate, moderate_estimate
from .domains import get_domain
from .errors import InvalidArgument, ModPoissonError
from .montecarlo import SamplerConfig, compare_laws, empirical_law, z_interval
from .oracle import pmf_exact, poisson_tail_gap
from .series import geometric_sum, mod_poisson_params, power_sum

SCHEMA = "modpoisson.report/v1"
COMMANDS = ("estimate", "oracle", "simulate", "compare", "sweep", "verify-constants")
SEED_ENV = "MODPOISSON_SEED"
DEFAULT_CUTOFF = 10**7
PLOT_QUANTITIES = {
    "ratio": ("s", "ratio", "ratio_err"),
    "bound_vs_actual": ("s", "actual_sup_gap", "bound"),
    "value": ("name", "value", "stated_bound", "pass"),
}


@dataclass
class ExperimentSpec:
    command: str
    domain: str = "riemann"
    statistic: str = "omega"
    s: list = field(default_factory=list)
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)
    kind: str = "upper_tail"
    target: str = "ld"  # sweep only: ld or be
    seed: int = 0
    samples: int = 100000
    method: str = None
    prime_cutoff: int = None
    k_max: int = 60
    tol: float = 1e-8
    threshold: float = 1.0
    workers: int = 1
    out: str = None
    domains: list = field(default_factory=list)  # verify-constants only

    def validate(self):
        if self.command not in COMMANDS:
            raise InvalidArgument(f"command must be one of {COMMANDS}")
        if self.command == "verify-constants":
            return self
        d = get_domain(self.domain)
        self.domain = d.id
        for name in ("s", "x", "y"):
            v = getattr(self, name)
            setattr(self, name, [float(t) for t in (v if isinstance(v, (list, tuple)) else [v])])
        if not self.s:
            raise InvalidArgument("at least one s value is required")
        bad = [s for s in self.s if not s > d.kappa]
        if bad:
            raise InvalidArgument(f"s values must exceed kappa = {d.kappa}: {bad}")
        if self.command == "sweep":
            if any(b >= a for a, b in zip(self.s, self.s[1:])):
                raise InvalidArgument("sweep grids must be strictly decreasing toward kappa")
            if self.target not in ("ld", "be"):
                raise InvalidArgument("sweep target must be ld or be")
        if self.command == "estimate" and not (self.x or self.y):
            raise InvalidArgument("estimate needs --x (large deviations) or --y (moderate deviations)")
        if self.command == "sweep" and self.target == "ld" and len(self.x) != 1:
            raise InvalidArgument("an ld sweep needs exactly one x")
        return self


@dataclass
class ExperimentReport:
    spec: dict
    records: list
    environment: dict
    timestamps: dict
    schema: str = SCHEMA

    @property
    def failed(self):
        return [r for r in self.records if r.get("status") != "ok" or r.get("values", {}).get("pass") is False]

    def to_dict(self):
        return {
            "schema": self.schema,
            "spec": self.spec,
            "environment": self.environment,
            "timestamps": self.timestamps,
            "records": self.records,
        }

    def save(self, directory):
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, "report.json")
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True, allow_nan=True)
        return path

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            data = json.load(fh)
        if data.get("schema") != SCHEMA:
            raise InvalidArgument(f"unknown report schema {data.get('schema')!r}")
        return cls(data["spec"], data["records"], data["environment"], data["timestamps"], data["schema"])


# ---------------------------------------------------------------------------
# per-point workers; each returns a record dict


def _cutoff(spec):
    d = get_domain(spec.domain)
    return spec.prime_cutoff or int(min(DEFAULT_CUTOFF, d.max_bound))


def _oracle_tail(spec, s, k, side):
    pmf = pmf_exact(spec.domain, spec.statistic, s, spec.k_max, _cutoff(spec), tail="poisson")
    if side == "upper":
        return pmf.sf(k), pmf
    return pmf.cdf(k), pmf


def _estimate_fields(est):
    out = dataclasses.asdict(est)
    out["uncorrected"] = est.uncorrected
    return out


def _point_estimate(spec, s, x, y):
    if x is not None:
        est = ld_estimate(spec.domain, spec.statistic, s, x, spec.kind, rel_tol=spec.tol)
        return {"values": _estimate_fields(est), "provenance": {"estimate": "analytics.ld_estimate"}}
    est = moderate_estimate(spec.domain, spec.statistic, s, y, spec.kind, spec.threshold, rel_tol=spec.tol)
    return {"values": _estimate_fields(est), "provenance": {"estimate": "analytics.moderate_estimate"}}


def _point_oracle(spec, s, x, y):
    pmf = pmf_exact(spec.domain, spec.statistic, s, spec.k_max, _cutoff(spec), tail="poisson")
    values = {"masses": [float(m) for m in pmf.masses], "mean": pmf.mean(), "var": pmf.var()}
    return {
        "values": values,
        "errors": {"model_error": pmf.model_error, "tail_mass": pmf.tail_mass},
        "provenance": {"masses": "oracle.pmf_exact", "truncation_model": pmf.truncation_model},
    }


def _sampler(spec, s):
    d = get_domain(spec.domain)
    method = spec.method
    if method is None:
        method = "degree_then_uniform" if d.id.startswith("poly_fq") else "per_prime_multiplicity"
    cutoff = (spec.prime_cutoff or 10**6) if method == "per_prime_multiplicity" else None
    return SamplerConfig(d.id, s, method, spec.seed, cutoff)


def _point_simulate(spec, s, x, y):
    config = _sampler(spec, s)
    law = empirical_law(config, spec.statistic, spec.samples)
    freqs, cis = [], []
    for k, c in enumerate(law.counts.tolist()):
        freqs.append(c / law.N)
        cis.append(list(z_interval(c, law.N)))
    return {
        "values": {"counts": law.counts.tolist(), "freq": freqs, "ci95": cis, "N": law.N},
        "errors": {"bias_bound": config.bias_bound},
        "provenance": {"counts": f"montecarlo.{config.method}", "seed": config.seed},
    }


def _point_compare(spec, s, x, y):
    config = _sampler(spec, s)
    law = empirical_law(config, spec.statistic, spec.samples)
    pmf = pmf_exact(spec.domain, spec.statistic, s, spec.k_max, _cutoff(spec), tail="poisson")
    cmp = compare_laws(law, pmf)
    return {
        "values": {
            "tv_distance": cmp.tv_distance,
            "max_abs_gap": cmp.max_abs_gap,
            "z_scores": [float(z) for z in cmp.z_scores],
            "flagged": list(cmp.flagged),
        },
        "errors": {"model_error": cmp.model_error, "bias_bound": cmp.bias_bound},
        "provenance": {"empirical": f"montecarlo.{config.method}", "exact": "oracle.pmf_exact"},
    }


def _point_sweep_ld(spec, s, x, y):
    est = ld_estimate(spec.domain, spec.statistic, s, x, spec.kind, rel_tol=spec.tol)
    side = "upper" if spec.kind == "upper_tail" else "lower"
    if spec.kind == "point":
        pmf = pmf_exact(spec.domain, spec.statistic, s, spec.k_max, _cutoff(spec), tail="poisson")
        oracle = pmf.pmf(est.k)
    else:
        oracle, pmf = _oracle_tail(spec, s, est.k, side)
    ratio = oracle / est.estimate
    return {
        "values": {
            "k": est.k,
            "x_eff": est.x_eff,
            "t_s": est.t_s,
            "estimate": est.estimate,
            "uncorrected": est.uncorrected,
            "residue_correction": est.residue_correction,
            "oracle": oracle,
            "ratio": ratio,
            "ratio_uncorrected": oracle / est.uncorrected,
            "ratio_err": pmf.model_error / est.estimate,
        },
        "errors": {"model_error": pmf.model_error},
        "provenance": {"estimate": "analytics.ld_estimate", "oracle": "oracle.pmf_exact"},
    }


def _point_sweep_be(spec, s, x, y):
    bound = berry_esseen_bound(spec.domain, spec.statistic, s)
    t = mod_poisson_params(spec.domain, spec.statistic, s).t_s.estimate
    pmf = pmf_exact(spec.domain, spec.statistic, s, spec.k_max, _cutoff(spec), tail="poisson")
    gap, k = poisson_tail_gap(pmf, t)
    actual = gap + pmf.model_error
    return {
        "values": {"actual_sup_gap": actual, "raw_gap": gap, "argmax_k": k, "bound": bound, "pass": actual <= bound},
        "errors": {"model_error": pmf.model_error},
        "provenance": {"bound": "analytics.berry_esseen_bound", "gap": "oracle.poisson_tail_gap"},
    }


_DISPATCH = {
    "estimate": _point_estimate,
    "oracle": _point_oracle,
    "simulate": _point_simulate,
    "compare": _point_compare,
    ("sweep", "ld"): _point_sweep_ld,
    ("sweep", "be"): _point_sweep_be,
}


def _run_point(args):
    spec, s, x, y = args
    key = ("sweep", spec.target) if spec.command == "sweep" else spec.command
    inputs = {"domain": spec.domain, "statistic": spec.statistic, "s": s, "x": x, "y": y, "kind": spec.kind}
    try:
        rec = _DISPATCH[key](spec, s, x, y)
        rec["status"] = "ok"
    except ModPoissonError as exc:
        rec = {"status": "error", "code": exc.code, "message": str(exc)}
    rec["inputs"] = inputs
    return rec


# ---------------------------------------------------------------------------
# reference constants and their stated upper bounds


def constant_checks(domains=None):
    """Records (name, certified upper value, printed bound, pass)."""
    items = [
        ("riemann", "P_2(1) = P(2)", lambda: power_sum("riemann", 2, 1.0), 1, math.pi**2 / 6),
        ("riemann", "sum_n n P(n+1)", lambda: geometric_sum("riemann", 1.0, 2), 1, 1.67),
        ("dedekind_psi", "P_2(2)", lambda: power_sum("dedekind_psi", 2, 2.0), 1, 1.06),
        ("euler_phi", "P_2(2)", lambda: power_sum("euler_phi", 2, 2.0), 1, 0.55),
        ("euler_phi", "sum_p 1/p^2", lambda: power_sum("riemann", 1, 2.0), 1, 0.55),
        ("divisor_count", "P_2(1)", lambda: power_sum("divisor_count", 2, 1.0), 1, 2.2),
        ("divisor_count", "sum_p 4/p^2", lambda: power_sum("riemann", 1, 2.0), 4, 2.2),
    ]
    out = []
    for dom, name, fn, scale, bound in items:
        if domains and dom not in domains:
            continue
        ts = fn()
        value, width = scale * ts.upper, scale * ts.tail_bound
        label = f"{dom}: {name}"
        out.append(
            {
                "status": "ok",
                "inputs": {"domain": dom, "name": label},
                "values": {"name": label, "value": value, "stated_bound": bound, "pass": value < bound},
                "errors": {"tail_bound": width},
                "provenance": {"value": "series, certified upper end"},
            }
        )
    return out


# ---------------------------------------------------------------------------


def _environment(spec):
    return {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": spec.seed,
    }


def _points(spec):
    xs = spec.x or [None]
    ys = spec.y or [None]
    if spec.command in ("oracle", "simulate", "compare") or (spec.command == "sweep" and spec.target == "be"):
        xs, ys = [None], [None]
    if spec.x and spec.y:
        raise InvalidArgument("give either --x or --y, not both")
    return [(spec, s, x, y) for s in spec.s for x in xs for y in ys]


def _sort_key(rec):
    inp = rec["inputs"]
    return tuple((v is None, v if v is not None else 0) for v in (inp.get("s"), inp.get("x"), inp.get("y"))) + (
        str(inp.get("name", "")),
    )


def run(spec):
    """Execute a spec; per-point failures are recorded and the run continues."""
    spec.validate()
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    if spec.command == "verify-constants":
        records = constant_checks(spec.domains or None)
    else:
        jobs = _points(spec)
        if spec.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=spec.workers) as pool:
                records = list(pool.map(_run_point, jobs))
        else:
            records = [_run_point(j) for j in jobs]
        records.sort(key=_sort_key)
    finished = datetime.datetime.now(datetime.timezone.utc).isoformat()
    report = ExperimentReport(dataclasses.asdict(spec), records, _environment(spec), {"started": started, "finished": finished})
    if spec.out:
        report.save(spec.out)
        for quantity in _quantities_for(spec):
            emit_plot_data(report, quantity, os.path.join(spec.out, f"{quantity}.csv"))
    return report


def _quantities_for(spec):
    if spec.command == "verify-constants":
        return ["value"]
    if spec.command == "sweep":
        return ["ratio"] if spec.target == "ld" else ["bound_vs_actual"]
    return []


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def emit_plot_data(report, quantity, path=None):
    """Plot-ready CSV for a report quantity; bit-stable for a given report."""
    if quantity not in PLOT_QUANTITIES:
        raise InvalidArgument(f"unknown quantity {quantity!r}; expected one of {sorted(PLOT_QUANTITIES)}")
    cols = PLOT_QUANTITIES[quantity]
    lines = [",".join(cols)]
    rows = 0
    for rec in report.records:
        if rec.get("status") != "ok":
            continue
        vals = dict(rec.get("values", {}))
        vals.setdefault("s", rec["inputs"].get("s"))
        if not all(c in vals for c in cols):
            continue
        lines.append(",".join(_fmt(vals[c]) for c in cols))
        rows += 1
    if rows == 0:
        raise InvalidArgument(f"report holds no {quantity!r} data")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="modpoisson", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with ExperimentSpec fields; flags override it")
    p.add_argument("--domain")
    p.add_argument("--domains", nargs="+", help="verify-constants: restrict to these domains")
    p.add_argument("--stat", dest="statistic", choices=("omega", "Omega"))
    p.add_argument("--s", type=float, nargs="+")
    p.add_argument("--x", type=float, nargs="+")
    p.add_argument("--y", type=float, nargs="+")
    p.add_argument("--kind", choices=("point", "upper_tail", "lower_tail"))
    p.add_argument("--target", choices=("ld", "be"))
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--method", choices=("per_prime_multiplicity", "inverse_cdf", "degree_then_uniform"))
    p.add_argument("--cutoff", dest="prime_cutoff", type=int)
    p.add_argument("--k-max", dest="k_max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--threshold", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    return p


def spec_from_args(argv=None):
    args = build_parser().parse_args(argv)
    fields = {}
    if args.config:
        with open(args.config) as fh:
            fields.update(json.load(fh))
    if SEED_ENV in os.environ and "seed" not in fields:
        fields["seed"] = int(os.environ[SEED_ENV])
    for k, v in vars(args).items():
        if k in ("config", "command") or v is None:
            continue
        fields[k] = v
    known = {f.name for f in dataclasses.fields(ExperimentSpec)}
    unknown = set(fields) - known
    if unknown:
        raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
    fields["command"] = args.command
    return ExperimentSpec(**fields)


def main(argv=None):
    try:
        spec = spec_from_args(argv)
        report = run(spec)
    except ModPoissonError as exc:
        print(json.dumps({"status": "error", "code": exc.code, "message": str(exc)}), file=sys.stderr)
        return 2
    summary = {"schema": SCHEMA, "command": spec.command, "records": len(report.records), "failed": len(report.failed)}
    if spec.command == "verify-constants":
        for rec in report.records:
            v = rec["values"]
            print(f"{'PASS' if v['pass'] else 'FAIL'}  {v['name']}: {v['value']:.10f} < {v['stated_bound']:.6g}")
    elif not spec.out:
        print(json.dumps(report.to_dict(), indent=2, sort_keys=True, default=str))
    print(json.dumps(summary), file=sys.stderr)
    if spec.command == "verify-constants" and report.failed:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
