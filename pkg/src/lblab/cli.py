"""Command-line experiment driver.

Every command writes its outputs together with ``manifest.json``; each
output embeds the SHA-256 of that manifest. Rerunning a manifest reproduces
the outputs byte for byte.

Exit codes: 0 ok, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .bernstein import (
    SobolevSpec,
    delta_exponent,
    factorization_exponents,
    heuristic_bn_lower,
    main_exponent,
    plichko_record,
    slope_fit,
)
from .besovbridge import (
    DyadicGrid,
    WEIGHT_CONVENTION,
    besov_seq_norm,
    dilated_bump_grid,
    haar_transform,
    parseval_check,
    proxy_params,
    refinement_stability,
)
from .errors import LblabError
from .extremal import pyramid_profile, sobolev_lower_bound
from .seqspace import SeqEmbeddingSpec

SCHEMA_VERSION = 1

DEFAULTS = {
    "spec": "2,1,1.5,2,4",
    "seq": "2,2,6,4",
    "eps": 0.01,
    "delta": 0.1,
    "nmax": 16,
    "seed": 0,
    "budget": 200,
    "levels": 64,
    "window": "8,8",
}


@dataclass
class ExperimentManifest:
    command: str
    params: dict
    seed: int
    budget: int
    outputs: list[str] = field(default_factory=list)
    tool_version: str = __version__
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "inf" if math.isinf(x) else repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[list], manifest: ExperimentManifest):
    buf = io.StringIO()
    buf.write(f"# manifest_sha256={manifest.sha256}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    path.write_text(buf.getvalue())


def _write_json(path: Path, payload: dict, manifest: ExperimentManifest):
    payload = {"manifest_sha256": manifest.sha256, **payload}
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _parse_seq(text: str) -> SeqEmbeddingSpec:
    vals = [math.inf if s.strip().lower() == "inf" else float(s) for s in text.split(",")]
    if len(vals) != 4:
        raise LblabError("--seq expects p0,q0,p1,q1")
    return SeqEmbeddingSpec(*vals)


def _window(text: str) -> tuple[int, int]:
    J, K = (int(s) for s in text.split(","))
    return J, K


# ---------------------------------------------------------------------------
# commands; each returns the payload it wrote, keyed by output file name


def exponents_rows(spec: SobolevSpec, eps: float, delta: float) -> list[list]:
    spec.validate(strict=False)
    rep = main_exponent(spec, eps)
    src, tgt = factorization_exponents(spec, delta)
    return [
        ["pstar", spec.pstar],
        ["main_exponent", rep.value],
        ["main_exponent_limit", rep.limit],
        ["sharp_exponent", rep.sharp],
        ["sharp_eps_threshold", rep.sharp_threshold],
        ["delta_exponent", delta_exponent(spec, delta)],
        ["source_besov_p", src.p],
        ["source_besov_q", src.q],
        ["source_besov_s", src.s],
        ["target_besov_p", tgt.p],
        ["target_besov_q", tgt.q],
        ["target_besov_s", tgt.s],
    ]


def cmd_exponents(args, out: Path | None, manifest: ExperimentManifest) -> None:
    spec = SobolevSpec.parse(args.spec)
    rows = exponents_rows(spec, args.eps, args.delta)
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {_fmt(v) if v is not None else '-'}")
    if out is not None:
        _write_csv(out / "exponents.csv", ["quantity", "value"], rows, manifest)


def seq_bernstein_rows(seq: SeqEmbeddingSpec, nmax: int, window, budget: int, seed: int):
    seq.require_admissible()
    h = hashlib.sha256(seq.to_json().encode()).hexdigest()[:12]
    upper = [plichko_record(n, seq) for n in range(1, nmax + 1)]
    lower = [heuristic_bn_lower(seq, n, window=window, budget=budget, seed=seed) for n in range(1, nmax + 1)]
    rows = [[h, r.n, r.kind, r.lo, r.hi] for r in upper + lower]
    return rows, upper, lower


def cmd_seq_bernstein(args, out: Path | None, manifest: ExperimentManifest) -> None:
    seq = _parse_seq(args.seq)
    rows, upper, lower = seq_bernstein_rows(seq, args.nmax, _window(args.window), args.budget, args.seed)
    if out is None:
        for r in rows:
            print(",".join(_fmt(v) for v in r))
        return
    _write_csv(out / "seq_bernstein.csv", ["spec_hash", "n", "kind", "lo", "hi"], rows, manifest)
    ns = [r.n for r in upper]
    plotting.loglog_series(
        out / "seq_bernstein.svg",
        {"certified upper (flat vector)": (ns, [r.hi for r in upper]), "heuristic max-min": (ns, [r.lo for r in lower])},
        f"l^{seq.q0}(l^{seq.p0}) -> l^{seq.q1}(l^{seq.p1})",
        manifest.sha256,
    )


def sobolev_rows(spec: SobolevSpec, nmax: int, levels: int, budget: int):
    spec.validate(strict=False)
    if spec.d != 2 or spec.m != 1:
        raise LblabError("the certified bump pipeline is fixed to d=2, m=1")
    fam = pyramid_profile(1.0, 1.0, levels)
    bounds = [sobolev_lower_bound(n, fam, spec.p, spec.q, spec.r, spec.pstar, budget) for n in range(1, nmax + 1)]
    decay = (0.0 if math.isinf(spec.r) else 1.0 / spec.r) - 1.0 / spec.q
    rows = [[b.n, b.lo, b.hi, b.constant * b.n**decay, int(b.flagged)] for b in bounds]
    return rows, bounds, fam


def cmd_sobolev_lower(args, out: Path | None, manifest: ExperimentManifest, suffix: str = "") -> None:
    spec = SobolevSpec.parse(args.spec)
    rows, bounds, fam = sobolev_rows(spec, args.nmax, args.levels, args.budget)
    header = ["n", "lo", "hi", "predicted", "flagged"]
    if out is None:
        print(",".join(header))
        for r in rows:
            print(",".join(_fmt(v) for v in r))
        return
    _write_csv(out / f"sobolev_lower{suffix}.csv", header, rows, manifest)
    pts = [(b.n, b.lo) for b in bounds]
    fit = slope_fit(pts) if len(pts) >= 3 else None
    _write_json(
        out / f"sobolev_family{suffix}.json",
        {
            "family": fam.descriptor(),
            "spec": spec.as_dict(),
            "construction_constant": bounds[0].constant,
            "source_constant": bounds[0].source_constant,
            "target_constant": bounds[0].target_constant,
            "zeroth_order_ratio": bounds[0].zeroth_order_ratio,
            "single_bump_interval": list(bounds[0].single_bump),
            "lo_slope": fit[0] if fit else None,
            "norm": "gradient seminorm",
        },
        manifest,
    )
    ns = [b.n for b in bounds]
    plotting.loglog_series(
        out / f"sobolev_lower{suffix}.svg",
        {"certified lo": (ns, [b.lo for b in bounds])},
        f"pyramid bumps, p={spec.p}, q={_fmt(spec.q)}, r={_fmt(spec.r)}",
        manifest.sha256,
        bands={"[lo, hi]": (ns, [b.lo for b in bounds], [b.hi for b in bounds])},
    )


def besov_payload(spec: SobolevSpec, delta: float, seed: int) -> dict:
    rng = np.random.default_rng(seed)
    parseval = [parseval_check(DyadicGrid(rng.standard_normal((2**J,) * d))) for d, J in ((1, 5), (1, 6), (2, 4), (2, 5))]
    stability = [refinement_stability(spec, delta, 1, 5), refinement_stability(spec, delta, 2, 4)]
    bs, bt = proxy_params(spec, delta, 2)
    dil = []
    for j in range(4):
        c = haar_transform(dilated_bump_grid(j, 8, spec.pstar))
        dil.append({"j": j, "source": besov_seq_norm(c, bs), "target": besov_seq_norm(c, bt)})
    src = [x["source"] for x in dil]
    return {
        "spec": spec.as_dict(),
        "delta": delta,
        "parseval_max_rel_error": max(parseval),
        "parseval_pass": max(parseval) <= 1e-10,
        "stability": stability,
        "stability_pass": all(s["stable"] for s in stability),
        "dilation_family": dil,
        "dilation_source_spread": max(src) / min(src),
        "weight_convention": WEIGHT_CONVENTION,
    }


def cmd_besov_demo(args, out: Path | None, manifest: ExperimentManifest) -> None:
    spec = SobolevSpec.parse(args.spec)
    payload = besov_payload(spec, args.delta, args.seed)
    if out is None:
        print(json.dumps(payload, sort_keys=True, indent=2, default=_json_default))
        return
    _write_json(out / "besov_demo.json", payload, manifest)
    ratios = {k: v for k, v in payload["stability"][1]["per_grid"].items()}
    plotting.ratio_bars(out / "besov_stability.svg", ratios, "ratio(J+1)/ratio(J), d=2", manifest.sha256)


def cmd_run_all(args, out: Path, manifest: ExperimentManifest) -> None:
    cmd_exponents(args, out, manifest)
    cmd_seq_bernstein(args, out, manifest)
    cmd_sobolev_lower(args, out, manifest)
    spec = SobolevSpec.parse(args.spec)
    witness = argparse.Namespace(**vars(args))
    witness.spec = f"{spec.d},{spec.m},{spec.p},{_fmt(spec.q)},{_fmt(spec.q)}"
    cmd_sobolev_lower(witness, out, manifest, suffix="_q_eq_r")
    cmd_besov_demo(args, out, manifest)


OUTPUTS = {
    "exponents": ["exponents.csv"],
    "seq-bernstein": ["seq_bernstein.csv", "seq_bernstein.svg"],
    "sobolev-lower": ["sobolev_lower.csv", "sobolev_family.json", "sobolev_lower.svg"],
    "besov-demo": ["besov_demo.json", "besov_stability.svg"],
}
OUTPUTS["run-all"] = (
    OUTPUTS["exponents"]
    + OUTPUTS["seq-bernstein"]
    + OUTPUTS["sobolev-lower"]
    + ["sobolev_lower_q_eq_r.csv", "sobolev_family_q_eq_r.json", "sobolev_lower_q_eq_r.svg"]
    + OUTPUTS["besov-demo"]
)

COMMANDS = {
    "exponents": cmd_exponents,
    "seq-bernstein": cmd_seq_bernstein,
    "sobolev-lower": cmd_sobolev_lower,
    "besov-demo": cmd_besov_demo,
    "run-all": cmd_run_all,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lblab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--spec", default=DEFAULTS["spec"], help="d,m,p,q,r (default %(default)s)")
        sp.add_argument("--seq", default=DEFAULTS["seq"], help="sequence embedding p0,q0,p1,q1")
        sp.add_argument("--eps", type=float, default=DEFAULTS["eps"])
        sp.add_argument("--delta", type=float, default=DEFAULTS["delta"])
        sp.add_argument("--nmax", type=int, default=DEFAULTS["nmax"])
        sp.add_argument("--seed", type=int, default=DEFAULTS["seed"])
        sp.add_argument("--budget", type=int, default=DEFAULTS["budget"])
        sp.add_argument("--levels", type=int, default=DEFAULTS["levels"])
        sp.add_argument("--window", default=DEFAULTS["window"], help="J,K window for sequence searches")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
    return ap


def manifest_for(args) -> ExperimentManifest:
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k not in ("command", "out")}
    return ExperimentManifest(
        command=args.command,
        params=params,
        seed=args.seed,
        budget=args.budget,
        outputs=list(OUTPUTS[args.command]),
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out: Path | None = args.out
    if args.command == "run-all" and out is None:
        out = Path("lblab-out")
    manifest = manifest_for(args)
    try:
        if out is not None:
            out.mkdir(parents=True, exist_ok=True)
            (out / "manifest.json").write_text(manifest.to_json() + "\n")
        COMMANDS[args.command](args, out, manifest)
    except LblabError as e:
        print(f"lblab: invalid input: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001
        print(f"lblab: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
