"""Command-line pipeline: simulate counts, analyze them, or run exactly.

Subcommands
-----------
simulate   draw synthetic coincidence counts for a state spec
analyze    estimate a state from a counts file and characterize it
exact      run the same characterization on an exact correlation matrix

State specs: ``cfr:q=<v>[,v=<visibility>]``, ``product:<ab>`` with labels
from {H, V, D, A, R, L}, ``bell:phi+|phi-|psi+|psi-``,
``mix:<comp>=<w>,...`` with product-pair or ``mixed`` components, or
``gamma:<path>`` pointing at a whitespace-separated 4x4 matrix file.

Counts files are flat text: comment lines starting with ``#`` followed by
nine records ``<alice basis> <bob basis> n_pp n_pm n_mp n_mm``.  Reports
are JSON documents whose numeric fields are rounded to nine significant
digits at construction, so written files read back bit-exactly.  The
quasiprobability tables are additionally emitted as CSV files next to the
report for plotting.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .pauli_core import (
    NumberField,
    POLARIZATION_BLOCH,
    cfr_state,
    check_correlation,
    product_correlation,
    similarity,
)
from .quasiprob import (
    QUBIT_ALPHABET,
    REBIT_ALPHABET,
    QuasiDecomposition,
    decompose,
    separability_certificate,
)
from .tomography import (
    DEFAULT_EVENTS,
    DEFAULT_MC_SAMPLES,
    BASES,
    CountsDataset,
    EstimatedState,
    estimate_correlations,
    mix_datasets,
    monte_carlo_propagate,
    repair_to_physical,
    simulate_counts,
)
from .witness import SIGMA_YY, DiagObservable, WitnessVerdict, evaluate_witness

SEED_ENV_VAR = "REBITKIT_SEED"

_BELL_GAMMAS = {
    "phi+": np.diag([1.0, 1.0, 1.0, -1.0]),
    "phi-": np.diag([1.0, 1.0, -1.0, 1.0]),
    "psi+": np.diag([1.0, -1.0, 1.0, 1.0]),
    "psi-": np.diag([1.0, -1.0, -1.0, -1.0]),
}

MIXED = np.diag([1.0, 0.0, 0.0, 0.0])


def _round9(x: float) -> float:
    x = float(x)
    if not np.isfinite(x):
        return x
    return float(f"{x:.9g}")


def _round9_matrix(m: np.ndarray) -> list[list[float]]:
    return [[_round9(v) for v in row] for row in np.asarray(m, float)]


def _round9_vector(v: np.ndarray) -> list[float]:
    return [_round9(x) for x in np.asarray(v, float)]


def _parse_params(rest: str, spec: str) -> dict[str, str]:
    params = {}
    for part in rest.split(","):
        key, eq, value = part.partition("=")
        if not eq:
            raise ValueError(f"malformed parameter {part!r} in state spec {spec!r}")
        params[key.strip()] = value.strip()
    return params


def _mix_components(rest: str, spec: str) -> list[tuple[np.ndarray, float, str]]:
    components = []
    for name, value in _parse_params(rest, spec).items():
        weight = float(value)
        if weight < 0:
            raise ValueError(f"negative weight for component {name!r}")
        if name == "mixed":
            gamma = MIXED.copy()
        elif len(name) == 2 and all(ch in POLARIZATION_BLOCH for ch in name):
            gamma = product_correlation(
                POLARIZATION_BLOCH[name[0]], POLARIZATION_BLOCH[name[1]]
            )
        else:
            raise ValueError(f"unknown mix component {name!r} in {spec!r}")
        components.append((gamma, weight, name))
    if not components or sum(w for _, w, _ in components) <= 0:
        raise ValueError(f"mix spec {spec!r} has no positive weight")
    return components


def parse_state_spec(spec: str) -> np.ndarray:
    """Correlation matrix for a state spec string."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "cfr":
        params = _parse_params(rest, spec)
        q = float(params["q"])
        vis = float(params.get("v", "1"))
        if not 0.0 <= vis <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {vis}")
        return vis * cfr_state(q) + (1.0 - vis) * MIXED
    if kind == "product":
        label = rest.strip()
        if len(label) != 2 or any(ch not in POLARIZATION_BLOCH for ch in label):
            raise ValueError(f"product spec needs two labels from HVDARL, got {rest!r}")
        return product_correlation(POLARIZATION_BLOCH[label[0]], POLARIZATION_BLOCH[label[1]])
    if kind == "bell":
        try:
            return _BELL_GAMMAS[rest.strip().lower()].copy()
        except KeyError:
            raise ValueError(f"unknown Bell state {rest!r}") from None
    if kind == "mix":
        components = _mix_components(rest, spec)
        total = sum(w for _, w, _ in components)
        return sum(g * (w / total) for g, w, _ in components)
    if kind == "gamma":
        gamma = np.loadtxt(rest)
        return check_correlation(gamma)
    raise ValueError(f"unknown state spec {spec!r}")


# ---------------------------------------------------------------------------
# counts file format

def write_counts(path: str, dataset: CountsDataset, meta: dict[str, str] | None = None) -> None:
    dataset.validate()
    lines = ["# rebitkit counts v1"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append("# alice_basis bob_basis n_pp n_pm n_mp n_mm")
    for a in BASES:
        for b in BASES:
            counts = dataset.settings[(a, b)]
            lines.append(f"{a} {b} {counts[0]} {counts[1]} {counts[2]} {counts[3]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_counts(path: str) -> CountsDataset:
    settings: dict[tuple[str, str], tuple[int, int, int, int]] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(parts)}")
            a, b = parts[0], parts[1]
            if a not in BASES or b not in BASES:
                raise ValueError(f"{path}:{lineno}: unknown basis pair ({a}, {b})")
            if (a, b) in settings:
                raise ValueError(f"{path}:{lineno}: duplicate setting ({a}, {b})")
            try:
                settings[(a, b)] = tuple(int(p) for p in parts[2:])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: counts must be integers, got {parts[2:]}"
                ) from None
    dataset = CountsDataset(settings=settings)
    dataset.validate()
    return dataset


# ---------------------------------------------------------------------------
# report document

@dataclass
class ReportDocument:
    """Aggregated analysis results, numerically rounded for serialization."""

    provenance: dict
    estimated: EstimatedState
    witness: WitnessVerdict
    decompositions: dict[NumberField, dict]
    similarity_to_target: dict | None
    monte_carlo: dict | None
    extra_witnesses: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        doc = {
            "format": "rebitkit-report v1",
            "provenance": self.provenance,
            "estimated": {
                "gamma": _round9_matrix(self.estimated.gamma),
                "sigma": _round9_matrix(self.estimated.sigma),
            },
            "witness": _witness_dict(self.witness),
            "similarity_to_target": self.similarity_to_target,
            "decompositions": {
                fld.value: block for fld, block in self.decompositions.items()
            },
            "monte_carlo": self.monte_carlo,
        }
        if self.extra_witnesses:
            doc["extra_witnesses"] = self.extra_witnesses
        return doc


def _witness_dict(v: WitnessVerdict, observable: str = "sigma_y x sigma_y") -> dict:
    return {
        "observable": observable,
        "expectation": _round9(v.expectation),
        "sigma": _round9(v.sigma),
        "bounds_real": [_round9(x) for x in v.bounds_real],
        "bounds_complex": [_round9(x) for x in v.bounds_complex],
        "r_entangled": v.r_entangled,
        "c_entangled": v.c_entangled,
        "significance": _round9(v.significance),
    }


def _decomposition_block(
    d: QuasiDecomposition,
    distance: float,
    distance_sigma: float,
    residual_sigma: float,
) -> dict:
    alphabet = REBIT_ALPHABET if d.field is NumberField.REAL else QUBIT_ALPHABET
    table = d.weight_table()
    table[np.abs(table) < 1e-12] = 0.0
    alice_states: dict[str, list[float]] = {}
    bob_states: dict[str, list[float]] = {}
    for alice, bob, _ in d.entries:
        alice_states.setdefault(alice.label, _round9_vector(alice.bloch))
        bob_states.setdefault(bob.label, _round9_vector(bob.bloch))
    return {
        "alphabet": list(alphabet),
        "weights": _round9_matrix(table),
        "alice_states": alice_states,
        "bob_states": bob_states,
        "distance": _round9(distance),
        "distance_sigma": _round9(distance_sigma),
        "residual_coeff": _round9(d.residual_coeff),
        "residual_sigma": _round9(residual_sigma),
        "certificate": separability_certificate(d),
    }


def run_analysis(
    estimated: EstimatedState,
    fields: list[NumberField],
    target_gamma: np.ndarray | None,
    mc_samples: int,
    mc_seed: int,
    provenance: dict,
    extra_observables: list[DiagObservable] | None = None,
) -> ReportDocument:
    """Witness, similarity, and decompositions with Monte-Carlo uncertainties.

    The witness and the similarity are evaluated on the raw estimate (the
    witness uncertainty propagates quadratically from the entrywise
    standard deviations); decompositions require a physical state, so they
    consume the eigenvalue-clipped repair of the estimate.  Monte-Carlo
    sampling, when enabled, repairs every sample the same way.
    """
    gamma = estimated.gamma
    verdict = evaluate_witness(gamma, SIGMA_YY, sigma_gamma=estimated.sigma)
    gamma_phys = repair_to_physical(gamma)
    repaired = not np.array_equal(gamma_phys, gamma)

    results: dict[NumberField, tuple[QuasiDecomposition, float]] = {}
    for fld in fields:
        results[fld] = decompose(gamma_phys, fld)

    sim_value = None
    if target_gamma is not None:
        sim_value = similarity(gamma, target_gamma)

    # one analysis vector drives the whole Monte-Carlo pass
    def mc_analysis(sample: np.ndarray) -> np.ndarray:
        out = []
        if target_gamma is not None:
            out.append(similarity(sample, target_gamma))
        for fld in fields:
            dec, dist = decompose(sample, fld)
            out.append(dist)
            out.append(dec.residual_coeff)
        return np.array(out)

    mc_block = None
    stds = np.zeros(len(fields) * 2 + (1 if target_gamma is not None else 0))
    if mc_samples >= 2 and estimated.sigma.max() > 0.0:
        _, stds = monte_carlo_propagate(estimated, mc_samples, mc_seed, mc_analysis)
        mc_block = {"samples": mc_samples, "seed": mc_seed}

    pos = 0
    similarity_block = None
    if target_gamma is not None:
        similarity_block = {
            "target": provenance.get("target", ""),
            "value": _round9(sim_value),
            "sigma": _round9(stds[pos]),
        }
        pos += 1
    decomposition_blocks: dict[NumberField, dict] = {}
    for fld in fields:
        dec, dist = results[fld]
        decomposition_blocks[fld] = _decomposition_block(
            dec, dist, distance_sigma=stds[pos], residual_sigma=stds[pos + 1]
        )
        pos += 2

    extra_blocks = []
    for obs in extra_observables or []:
        extra = evaluate_witness(gamma, obs, sigma_gamma=estimated.sigma)
        extra_blocks.append(
            _witness_dict(extra, observable=f"{obs.lz}*zz + {obs.lx}*xx + {obs.ly}*yy")
        )

    provenance = dict(provenance)
    provenance["estimate_repaired"] = repaired
    return ReportDocument(
        provenance=provenance,
        estimated=estimated,
        witness=verdict,
        decompositions=decomposition_blocks,
        similarity_to_target=similarity_block,
        monte_carlo=mc_block,
        extra_witnesses=extra_blocks,
    )


def write_report(path: str, report: ReportDocument) -> None:
    with open(path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    base, _ = os.path.splitext(path)
    for fld, block in report.decompositions.items():
        _write_quasi_csv(f"{base}.quasi_{fld.value}.csv", block)


def read_report(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write_quasi_csv(path: str, block: dict) -> None:
    alphabet = block["alphabet"]
    lines = ["," + ",".join(alphabet)]
    for label, row in zip(alphabet, block["weights"]):
        lines.append(label + "," + ",".join(f"{w:.9g}" for w in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands

def _parse_fields(text: str) -> list[NumberField]:
    fields = []
    for part in text.split(","):
        part = part.strip().lower()
        if not part:
            continue
        try:
            fields.append(NumberField(part))
        except ValueError:
            raise ValueError(f"unknown field {part!r}; use real and/or complex") from None
    if not fields:
        raise ValueError("no fields requested")
    return fields


def _parse_observable(text: str) -> DiagObservable:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"observable needs three coefficients lz,lx,ly, got {text!r}")
    return DiagObservable(*(float(p) for p in parts))


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "0"))


def _gamma_comment(gamma: np.ndarray) -> str:
    return "; ".join(" ".join(f"{v:.9g}" for v in row) for row in gamma)


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = args.state
    events = args.events
    seed = args.seed if args.seed is not None else _default_seed()
    kind, _, rest = spec.partition(":")
    if kind.strip().lower() == "mix":
        # classical mixture: simulate each component, then combine datasets
        components = _mix_components(rest, spec)
        total = sum(w for _, w, _ in components)
        gamma = sum(g * (w / total) for g, w, _ in components)
        parts = [
            (simulate_counts(g, events, seed=seed + i), w)
            for i, (g, w, _) in enumerate(components)
        ]
        dataset = mix_datasets(parts)
    else:
        gamma = parse_state_spec(spec)
        dataset = simulate_counts(gamma, events, seed=seed)
    meta = {
        "state": spec,
        "events-per-setting": str(events),
        "seed": str(seed),
        "true-gamma": _gamma_comment(gamma),
    }
    write_counts(args.out, dataset, meta)
    print(f"wrote {args.out}")
    print("true gamma:")
    for row in gamma:
        print("  " + " ".join(f"{v:+.9f}" for v in row))
    return 0


def _report_summary(report: ReportDocument) -> str:
    lines = []
    w = report.witness
    lines.append(
        f"<sigma_y x sigma_y> = {w.expectation:.9g} +- {w.sigma:.9g}"
        f"  (R-entangled: {w.r_entangled}, C-entangled: {w.c_entangled})"
    )
    if report.similarity_to_target is not None:
        s = report.similarity_to_target
        lines.append(f"similarity to target = {s['value']:.9g} +- {s['sigma']:.9g}")
    for fld, block in report.decompositions.items():
        lines.append(
            f"{fld.value} decomposition: distance {block['distance']:.9g} "
            f"+- {block['distance_sigma']:.9g}, separable: {block['certificate']}"
        )
    return "\n".join(lines)


def cmd_analyze(args: argparse.Namespace) -> int:
    dataset = read_counts(args.counts)
    estimated = estimate_correlations(dataset)
    fields = _parse_fields(args.fields)
    seed = args.seed if args.seed is not None else _default_seed()
    target_gamma = parse_state_spec(args.target) if args.target else None
    extra = [_parse_observable(o) for o in args.observable]
    provenance = {
        "command": "analyze",
        "counts_path": args.counts,
        "fields": [f.value for f in fields],
        "target": args.target or "",
        "mc_samples": args.mc_samples,
        "mc_seed": seed,
    }
    report = run_analysis(
        estimated,
        fields,
        target_gamma,
        mc_samples=args.mc_samples,
        mc_seed=seed,
        provenance=provenance,
        extra_observables=extra,
    )
    write_report(args.out, report)
    print(f"wrote {args.out}")
    print(_report_summary(report))
    return 0


def cmd_exact(args: argparse.Namespace) -> int:
    gamma = parse_state_spec(args.state)
    fields = _parse_fields(args.fields)
    target_gamma = parse_state_spec(args.target) if args.target else None
    extra = [_parse_observable(o) for o in args.observable]
    estimated = EstimatedState(gamma=gamma, sigma=np.zeros((4, 4)))
    provenance = {
        "command": "exact",
        "state": args.state,
        "fields": [f.value for f in fields],
        "target": args.target or "",
        "mc_samples": 0,
        "mc_seed": 0,
    }
    report = run_analysis(
        estimated,
        fields,
        target_gamma,
        mc_samples=0,
        mc_seed=0,
        provenance=provenance,
        extra_observables=extra,
    )
    write_report(args.out, report)
    print(f"wrote {args.out}")
    print(_report_summary(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rebitkit",
        description="Characterize two-level pair states over real and complex numbers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="draw synthetic coincidence counts")
    p_sim.add_argument("--state", required=True, help="state spec, e.g. cfr:q=1 or mix:RR=0.5,LL=0.5")
    p_sim.add_argument("--events", type=int, default=DEFAULT_EVENTS, help="events per setting")
    p_sim.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV_VAR} or 0)")
    p_sim.add_argument("--out", required=True, help="counts file to write")
    p_sim.set_defaults(func=cmd_simulate)

    p_ana = sub.add_parser("analyze", help="characterize a counts file")
    p_ana.add_argument("--counts", required=True, help="counts file to read")
    p_ana.add_argument("--target", default="", help="state spec for the similarity comparison")
    p_ana.add_argument("--fields", "--field", default="real,complex", help="comma list of number fields")
    p_ana.add_argument("--mc-samples", type=int, default=DEFAULT_MC_SAMPLES, help="Monte-Carlo sample count")
    p_ana.add_argument("--seed", type=int, default=None, help="Monte-Carlo seed")
    p_ana.add_argument("--observable", action="append", default=[], help="extra witness lz,lx,ly")
    p_ana.add_argument("--out", required=True, help="report file to write")
    p_ana.set_defaults(func=cmd_analyze)

    p_ex = sub.add_parser("exact", help="characterize an exact state")
    p_ex.add_argument("--state", required=True, help="state spec")
    p_ex.add_argument("--target", default="", help="state spec for the similarity comparison")
    p_ex.add_argument("--fields", "--field", default="real,complex", help="comma list of number fields")
    p_ex.add_argument("--observable", action="append", default=[], help="extra witness lz,lx,ly")
    p_ex.add_argument("--out", required=True, help="report file to write")
    p_ex.set_defaults(func=cmd_exact)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
