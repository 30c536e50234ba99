"""Command line front end: model files in, JSON or CSV out.

A model file is one JSON object:

    {
      "chain": {"alphabets": [3, 2], "factor_maps": [[0, 0, 1]]},
      "a": [0.9102392266268373, 0.5324558142621261],
      "potentials": {
        "zero": {"zero": true},
        "geo":  {"level": 1, "depth": 1, "log_table": [0.0, -0.7, -1.1]}
      },
      "measures": {"mu": {"bernoulli": [0.5, 0.3, 0.2]}},
      "budget": {"n_max": 12, "budget": 1e7}
    }

Outputs are deterministic byte for byte for a fixed model and flags; the
thread count only splits the enumeration work, never the reduction shape.

Exit codes: 0 ok, 2 bad model or request, 3 exhausted budget or iteration
cap, 4 infeasible constraint.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .equilibrium import InvariantMeasureSpec, WeightedGibbsMeasure
from .errors import (
    BudgetError,
    ConstraintError,
    EnclosureWidthError,
    IterationLimitError,
    ModelError,
)
from .marginal_projection import MarginalConstraint, project
from .multifractal import (
    birkhoff_spectrum,
    dimension_of_space,
    generic_set_dimension,
    local_dimension_spectrum,
)
from .potential import FiniteDepthPotential, zero_potential
from .pressure import DEFAULT_BUDGET, pressure
from .shift_space import FactorChain, WeightVector


class _Model:
    def __init__(self, raw: dict):
        try:
            ch = raw["chain"]
            self.chain = FactorChain(
                tuple(int(x) for x in ch["alphabets"]),
                tuple(tuple(int(s) for s in m) for m in ch.get("factor_maps", [])),
            )
            self.weights = WeightVector(tuple(float(x) for x in raw["a"]))
            self.potentials = {}
            for name, spec in raw.get("potentials", {}).items():
                self.potentials[name] = self._potential(spec)
            self.measures = {}
            for name, spec in raw.get("measures", {}).items():
                self.measures[name] = self._measure(spec)
            b = raw.get("budget", {})
            self.n_max = int(b["n_max"]) if "n_max" in b else None
            self.budget = float(b.get("budget", DEFAULT_BUDGET))
        except (KeyError, TypeError, ValueError) as e:
            raise ModelError(f"malformed model file: {e}") from e
        if len(self.weights) != self.chain.k:
            raise ModelError("weight vector length must match the chain")

    def _potential(self, spec) -> FiniteDepthPotential:
        if spec.get("zero"):
            return zero_potential(1, self.chain.alphabet_sizes[0])
        return FiniteDepthPotential(
            int(spec.get("level", 1)),
            int(spec["depth"]),
            np.asarray(spec["log_table"], dtype=float),
            qm_log_constant=(
                float(spec["qm_log_constant"]) if "qm_log_constant" in spec else None
            ),
        )

    def _measure(self, spec) -> InvariantMeasureSpec:
        if "bernoulli" in spec:
            return InvariantMeasureSpec.bernoulli(spec["bernoulli"])
        if "markov" in spec:
            m = spec["markov"]
            return InvariantMeasureSpec.markov(m["initial"], m["transition"])
        raise ModelError("measure spec needs 'bernoulli' or 'markov'")

    def potential(self, name: str) -> FiniteDepthPotential:
        if name not in self.potentials:
            raise ModelError(f"unknown potential {name!r}")
        return self.potentials[name]

    def measure(self, name: str) -> InvariantMeasureSpec:
        if name not in self.measures:
            raise ModelError(f"unknown measure {name!r}")
        return self.measures[name]


def _load(path: str) -> _Model:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ModelError(f"cannot read model file {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ModelError("model file must hold one JSON object")
    return _Model(raw)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _cmd_pressure(args) -> str:
    model = _load(args.model)
    pot = model.potential(args.potential)
    enc = pressure(
        pot,
        model.chain,
        model.weights,
        n_max=args.n_max if args.n_max is not None else model.n_max,
        budget=args.budget if args.budget is not None else model.budget,
        method=args.method,
        threads=args.threads,
    )
    return _json_text(enc.as_dict())


def _cmd_dimension(args) -> str:
    model = _load(args.model)
    if args.measure is None:
        v = dimension_of_space(model.chain, model.weights)
        return _json_text({"dimension": v, "lo": v, "hi": v})
    eta = model.measure(args.measure)
    b = generic_set_dimension(eta, model.chain, model.weights, block_len=args.block_len)
    return _json_text({"dimension": b.value, "lo": b.lo, "hi": b.hi})


def _cmd_spectrum(args) -> str:
    model = _load(args.model)
    kw = dict(
        q_range=(-args.q_max, args.q_max),
        q_steps=args.q_steps,
        n_max=args.n_max if args.n_max is not None else model.n_max,
        budget=args.budget if args.budget is not None else model.budget,
        threads=args.threads,
    )
    if args.local_dims:
        if args.measure is None:
            raise ModelError("--local-dims needs --measure")
        spec = local_dimension_spectrum(
            model.measure(args.measure), model.chain, model.weights, **kw
        )
    else:
        if args.potential is None:
            raise ModelError("spectrum needs --potential or --measure with --local-dims")
        spec = birkhoff_spectrum(
            model.potential(args.potential), model.chain, model.weights, **kw
        )
    return spec.to_csv(dedup=True)


def _cmd_project(args) -> str:
    model = _load(args.model)
    eta = model.measure(args.measure)
    constraint = MarginalConstraint(
        args.blocks, tuple(float(x) for x in eta.block_distribution(args.blocks))
    )
    res = project(
        constraint,
        model.chain,
        model.weights,
        n_max=args.n_max if args.n_max is not None else model.n_max,
        budget=args.budget if args.budget is not None else model.budget,
        threads=args.threads,
    )
    payload = {
        "entropy": res.entropy,
        "marginal_error": res.marginal_error,
        "iterations": res.iterations,
        "status": res.status,
        "q": list(res.q),
    }
    if res.measure.mode == "exact_depth1":
        payload["symbol_masses"] = [float(x) for x in np.exp(res.measure.log_symbol_mass)]
    return _json_text(payload)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="affshift",
        description="weighted thermodynamic formalism on chains of full shifts",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, threads=True):
        p.add_argument("--model", required=True, help="model JSON file")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--n-max", type=int, default=None, help="cap the word length")
        p.add_argument("--budget", type=float, default=None, help="enumeration budget")
        if threads:
            p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("pressure", help="weighted pressure of a named potential")
    common(p)
    p.add_argument("--potential", required=True)
    p.add_argument("--method", choices=["auto", "enclosure"], default="auto")
    p.set_defaults(func=_cmd_pressure)

    p = sub.add_parser("dimension", help="dimension of the space or of a measure")
    common(p, threads=False)
    p.add_argument("--measure", default=None)
    p.add_argument("--block-len", type=int, default=8, help="entropy bracket horizon")
    p.set_defaults(func=_cmd_dimension)

    p = sub.add_parser("spectrum", help="multifractal spectrum as CSV")
    common(p)
    p.add_argument("--potential", default=None)
    p.add_argument("--measure", default=None)
    p.add_argument("--local-dims", action="store_true", help="local dimension spectrum")
    p.add_argument("--q-max", type=float, default=10.0)
    p.add_argument("--q-steps", type=int, default=101)
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("project-marginals", help="max-entropy measure with a measure's block marginal")
    common(p)
    p.add_argument("--measure", required=True)
    p.add_argument("--blocks", type=int, default=1, help="marginal block length")
    p.set_defaults(func=_cmd_project)

    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        text = args.func(args)
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (BudgetError, IterationLimitError, EnclosureWidthError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except ConstraintError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    _emit(text, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
