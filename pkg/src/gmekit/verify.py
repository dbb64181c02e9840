"""Reference checks on the four-qubit example state and the partition calculus."""
from __future__ import annotations

import math

import numpy as np

from .entropies import spectrum
from .genuine import delta_pure, gmc_with_cut
from .measures import Family, MeasureSpec, bipartite_value
from .monogamy import audit_tight
from .partitions import Coarsen, Partition, all_bipartitions, is_coarser, partitions_into, xi_set
from .states import PureState, partial_trace

TOL = 1e-9
LABELS5 = "ABCDE"

# the seven two-block and six three-block splits of four parties, as usually listed
SEVEN_SPLITS = ["AB|CD", "AC|BD", "AD|BC", "A|BCD", "B|ACD", "C|ABD", "D|ABC"]
SIX_SPLITS = ["A|B|CD", "A|BC|D", "AC|B|D", "AB|C|D", "AD|B|C", "A|BD|C"]
XI_LISTED = ["CD|E", "A|CD|E", "B|CD|E", "A|CD", "A|E", "B|E", "A|C", "A|D", "B|C", "B|D"]
CHAIN = [  # (finer, coarser, mode)
    ("A|B|C|D|E", "A|B|C|DE", Coarsen.COMBINE),
    ("A|B|C|DE", "A|B|C|D", Coarsen.DISCARD),
    ("A|B|C|D", "AB|C|D", Coarsen.COMBINE),
    ("AB|C|D", "AB|CD", Coarsen.COMBINE),
    ("A|B|C|DE", "A|B|DE", Coarsen.DISCARD),
    ("A|B|C|D", "AC|B|D", Coarsen.COMBINE),
    ("AC|B|D", "AC|BD", Coarsen.COMBINE),
]


def _p(text: str) -> Partition:
    return Partition.parse(text, LABELS5)


def _check(name: str, ok: bool, detail) -> dict:
    return {"name": name, "pass": bool(ok), "detail": detail}


def _close(name: str, value: float, target: float, tol: float = TOL) -> dict:
    err = abs(value - target)
    return _check(name, err <= tol, {"value": value, "expected": target, "abs_err": err, "tol": tol})


def run_checks(state: PureState) -> list[dict]:
    """Every reference number, recomputed; each entry carries pass/fail and detail."""
    out = []
    shape = state.shape
    if not isinstance(state, PureState) or shape.dims != (2, 2, 2, 2):
        return [_check("four-qubit pure input", False, {"dims": list(shape.dims)})]
    labels = shape.labels
    c_abc_d = bipartite_value(Family.CONCURRENCE, state, shape.partition("ABC|D"))
    c_ab_cd = bipartite_value(Family.CONCURRENCE, state, shape.partition("AB|CD"))
    out.append(_close("concurrence ABC|D = sqrt(15)/8", c_abc_d, math.sqrt(15) / 8))
    out.append(_close("concurrence AB|CD = sqrt(65)/8", c_ab_cd, math.sqrt(65) / 8))
    lam = np.sort(spectrum(partial_trace(state, [3])))[::-1]
    out.append(_check("marginal of D = diag(15/16, 1/16)",
                      np.allclose(lam, [15 / 16, 1 / 16], atol=TOL), {"spectrum": lam.tolist()}))

    gmc, cut = gmc_with_cut(state)
    cuts = {p.format(labels): bipartite_value(Family.CONCURRENCE, state, p)
            for p in all_bipartitions(4)}
    others = [v for k, v in cuts.items() if k != "ABC|D"]
    out.append(_close("GMC = sqrt(15)/8", gmc, math.sqrt(15) / 8))
    out.append(_check("GMC minimized only at ABC|D",
                      cut.format(labels) == "ABC|D" and min(others) > gmc + TOL,
                      {"cut": cut.format(labels), "cut_values": cuts}))
    out.append(_check("genuinely entangled (delta = 1)", delta_pure(state).value == 1,
                      delta_pure(state).to_dict(labels)))

    rep = audit_tight(MeasureSpec(Family.GMC), state)
    ab_cd = next(h for h in rep.hierarchy if h.child == "AB|CD")
    target = math.sqrt(15) / 8 - math.sqrt(65) / 8
    out.append(_check(
        "GMC tight monogamy violated at AB|CD",
        rep.verdict == "violated" and abs(ab_cd.residual - target) <= TOL,
        {"verdict": rep.verdict, "residual": ab_cd.residual, "expected": target},
    ))

    four = [p.format(LABELS5) for p in all_bipartitions(4)]
    out.append(_check("seven two-block splits", sorted(four) == sorted(_canon(SEVEN_SPLITS)),
                      {"computed": four}))
    three = [p.format(LABELS5) for p in partitions_into(range(4), 3)]
    out.append(_check("six three-block splits", sorted(three) == sorted(_canon(SIX_SPLITS)),
                      {"computed": three}))

    for x, y, mode in CHAIN:
        out.append(_check(f"{x} > {y} ({mode.name.lower()})", is_coarser(_p(x), _p(y), mode),
                          {"mode": mode.name.lower()}))

    xi = {z.format(LABELS5) for z in xi_set(_p("A|B|CD|E"), _p("A|B"))}
    listed = set(_canon(XI_LISTED))
    out.append(_check("Xi(A|B|CD|E - A|B) contains the listed ten", listed <= xi, {
        "computed_count": len(xi),
        "missing": sorted(listed - xi),
        "extra_beyond_listed": sorted(xi - listed),
    }))
    return out


def _canon(texts) -> list[str]:
    return [_p(t).format(LABELS5) for t in texts]
