"""Monogamy audits over the coarsening lattice.

Three audits are provided:

``audit_complete``
    compares the genuine value of the whole state with the values of
    every marginal reachable by discarding parties, both directly (strict
    domination) and through power residuals
    ``r(alpha) = E^alpha(parent) - sum E^alpha(children)`` per marginal level;
``audit_tight``
    compares the whole state with every block-combined view, and falls
    back to the Xi-set test whenever the two values coincide;
``audit_disentangling``
    checks the tripartite equality conditions and, when one is triggered,
    whether the leftover marginals vanish.

Marginal values on mixed states come from the convex roof and are upper
bounds. They sit on the larger side of every inequality audited here, so
a satisfied inequality is a sound verdict. A violation may be an optimizer
artifact; it is re-audited with four times the restarts and stays flagged.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .convex_roof import RoofConfig, biseparability_certificate, evaluate
from .errors import InvalidArgumentError
from .genuine import delta_pure
from .measures import COMPLETE, Family, MeasureSpec
from .partitions import Coarsen, Partition, coarsenings, is_coarser, xi_set
from .states import PureState, State, SystemShape, random_pure, regroup

SCHEMA_VERSION = "gmekit.monogamy/1"
STRICT_MARGIN = 1e-9
EQUALITY_TOL = 1e-4
LEFTOVER_TOL = 1e-3
BOUNDARY_TOL = 1e-3
ESCALATION = 4


def default_alpha_grid() -> np.ndarray:
    """64 logarithmically spaced exponents in [0.25, 8]."""
    return np.geomspace(0.25, 8.0, 64)


def _check_grid(alpha_grid) -> tuple[float, ...]:
    grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidArgumentError("alpha grid must be a nonempty list of exponents")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise InvalidArgumentError("alpha grid entries must be finite and positive")
    return tuple(float(a) for a in np.sort(grid))


def power_residual(parent: float, children: Sequence[float], alpha: float) -> float:
    """``parent^alpha - sum children^alpha``, summed in the given order."""
    total = parent ** alpha
    for c in children:
        total -= max(c, 0.0) ** alpha
    return float(total)


# --------------------------------------------------------------------------- #
# report types

@dataclass
class ChildValue:
    partition: Partition
    value: float
    exact: bool
    relation: str

    def to_dict(self, labels) -> dict:
        return {
            "partition": self.partition.format(labels),
            "value": self.value,
            "exact": self.exact,
            "upper_bound": not self.exact,
            "relation": self.relation,
        }


@dataclass
class Curve:
    """A power residual over the alpha grid for one group of children."""

    name: str
    children: list[str]
    residuals: list[float]
    alpha_star: float | None
    boundary: float | None
    sign_changes: int
    strict: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "children": self.children,
            "residuals": self.residuals,
            "alpha_star": self.alpha_star,
            "boundary": self.boundary,
            "sign_changes": self.sign_changes,
            "monotone_sign": self.sign_changes <= 1,
            "strict": self.strict,
        }


@dataclass
class HierarchyCheck:
    """Parent against one block-combined view, with the Xi fallback on equality."""

    child: str
    residual: float
    status: str  # "strict", "equality" or "violated"
    xi_values: dict[str, float] = field(default_factory=dict)
    xi_vanish: bool | None = None

    def to_dict(self) -> dict:
        return {
            "child": self.child,
            "residual": self.residual,
            "status": self.status,
            "xi_values": self.xi_values,
            "xi_vanish": self.xi_vanish,
        }


@dataclass
class MonogamyReport:
    state_id: str
    spec: MeasureSpec
    mode: str
    labels: tuple[str, ...]
    parent: Partition
    parent_value: float
    parent_exact: bool
    children: list[ChildValue]
    alpha_grid: tuple[float, ...]
    curves: list[Curve]
    verdict: str
    vacuous: bool
    hierarchy: list[HierarchyCheck] = field(default_factory=list)
    escalated: bool = False
    possibly_optimizer_artifact: bool = False
    certificate: dict | None = None
    roof_config: dict | None = None

    def child_value(self, text: str) -> float:
        for c in self.children:
            if c.partition.format(self.labels) == text:
                return c.value
        raise KeyError(text)

    def curve(self, name: str) -> Curve:
        for c in self.curves:
            if c.name == name:
                return c
        raise KeyError(name)

    def residual_at(self, alpha: float, curve: str | None = None) -> float:
        """Residual of a stored curve at any exponent, from the stored values."""
        cur = self.curves[0] if curve is None else self.curve(curve)
        return power_residual(self.parent_value, [self.child_value(c) for c in cur.children], alpha)

    @property
    def alpha_star(self) -> float | None:
        """Smallest grid exponent at which every curve passes."""
        if not self.curves:
            return None
        for n, a in enumerate(self.alpha_grid):
            if all(_passes(c, c.residuals[n]) for c in self.curves):
                return a
        return None

    @property
    def margin(self) -> float | None:
        """Smallest gap between the parent value and a child value (None if vacuous)."""
        if self.vacuous or not self.children:
            return None
        if self.mode == "tight":
            return min(h.residual for h in self.hierarchy)
        return min(self.parent_value - c.value for c in self.children)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "state_id": self.state_id,
            "mode": self.mode,
            "spec": self.spec.to_dict(),
            "parent": {
                "partition": self.parent.format(self.labels),
                "value": self.parent_value,
                "exact": self.parent_exact,
            },
            "children": [c.to_dict(self.labels) for c in self.children],
            "alpha_grid": list(self.alpha_grid),
            "curves": [c.to_dict() for c in self.curves],
            "alpha_star": self.alpha_star,
            "hierarchy": [h.to_dict() for h in self.hierarchy],
            "verdict": self.verdict,
            "vacuous": self.vacuous,
            "margin": self.margin,
            "escalated": self.escalated,
            "possibly_optimizer_artifact": self.possibly_optimizer_artifact,
            "certificate": self.certificate,
            "roof_config": self.roof_config,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


@dataclass
class DisentanglingReport:
    state_id: str
    spec: MeasureSpec
    mode: str
    lhs: tuple[str, float]
    rhs: tuple[str, float]
    residual: float
    triggered: bool
    leftovers: dict[str, float]
    verdict: str  # "inapplicable", "monogamy-consistent" or "violated"

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "state_id": self.state_id,
            "mode": self.mode,
            "spec": self.spec.to_dict(),
            "lhs": {"term": self.lhs[0], "value": self.lhs[1]},
            "rhs": {"term": self.rhs[0], "value": self.rhs[1]},
            "residual": self.residual,
            "triggered": self.triggered,
            "trigger_tol": EQUALITY_TOL,
            "leftovers": self.leftovers,
            "leftover_tol": LEFTOVER_TOL,
            "verdict": self.verdict,
        }


# --------------------------------------------------------------------------- #
# shared helpers

def _labels(state: State) -> tuple[str, ...]:
    return tuple(state.shape.labels)


def _child_spec(spec: MeasureSpec, k: int) -> MeasureSpec:
    """Genuine spec on views with three or more blocks, plain spec on two.

    On two blocks the gate only removes product members, on which every
    family already vanishes, so the plain roof is the same quantity.
    """
    return spec.plain() if k == 2 else spec.as_genuine()


class _Values:
    """Per-audit memo of view values, so shared marginals are evaluated once."""

    def __init__(self, spec: MeasureSpec, state: State, cfg: RoofConfig):
        self.spec, self.state, self.cfg = spec, state, cfg
        self.memo: dict[Partition, tuple[float, bool]] = {}

    def __call__(self, part: Partition) -> tuple[float, bool]:
        if part not in self.memo:
            ev = evaluate(_child_spec(self.spec, part.k), self.state, part, self.cfg)
            self.memo[part] = (ev.value, ev.exact)
        return self.memo[part]


def _vacuity(state: State, parent: Partition, cfg: RoofConfig) -> tuple[bool, dict]:
    """Biseparable inputs make every audit vacuous; mixed inputs use the numerical search."""
    if isinstance(state, PureState):
        verdict = delta_pure(state, partition=parent)
        return verdict.value == 0, {"kind": "pure", **verdict.to_dict(state.shape.labels)}
    cert = biseparability_certificate(regroup(state, parent), cfg)
    return cert.found, {"kind": "numerical", **cert.to_dict()}


def _parent(state: State, partition: Partition | None) -> Partition:
    m = state.shape.m
    parent = Partition.finest(range(m)) if partition is None else partition
    state.shape.check_partition(parent)
    if not parent.covers(m):
        raise InvalidArgumentError("the audited partition must cover every subsystem")
    if parent.k < 2:
        raise InvalidArgumentError("the audited partition needs at least two blocks")
    return parent


def _passes(curve: Curve, residual: float) -> bool:
    return residual > (STRICT_MARGIN if curve.strict else -STRICT_MARGIN)


def _sign_changes(values: Sequence[float], margin: float) -> int:
    signs = [1 if v > margin else -1 for v in values]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _bisect(fn, lo: float, hi: float, tol: float) -> float:
    """Exponent where ``fn`` turns true, between ``lo`` (false) and ``hi`` (true)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if fn(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _curve(name: str, parent: float, children: list[tuple[str, float]], grid, strict: bool) -> Curve:
    names = [n for n, _ in children]
    vals = [v for _, v in children]
    margin = STRICT_MARGIN if strict else -STRICT_MARGIN

    def ok(a: float) -> bool:
        return power_residual(parent, vals, a) > margin

    residuals = [power_residual(parent, vals, a) for a in grid]
    passing = [r > margin for r in residuals]
    alpha_star = boundary = None
    if any(passing):
        first = passing.index(True)
        alpha_star = grid[first]
        boundary = grid[0] if first == 0 else _bisect(ok, grid[first - 1], grid[first], BOUNDARY_TOL)
    return Curve(name, names, residuals, alpha_star, boundary,
                 _sign_changes(residuals, margin), strict)


def _vacuous_report(state_id, spec, mode, state, parent, grid, cert, cfg) -> MonogamyReport:
    return MonogamyReport(
        state_id, spec, mode, _labels(state), parent, 0.0, True, [], grid, [],
        "vacuous", True, certificate=cert, roof_config=cfg.to_dict(),
    )


# --------------------------------------------------------------------------- #
# complete monogamy

def audit_complete(
    spec: MeasureSpec,
    state: State,
    alpha_grid=None,
    cfg: RoofConfig | None = None,
    partition: Partition | None = None,
    state_id: str = "state",
    escalate: bool = True,
) -> MonogamyReport:
    """Genuine value of the whole state against every discard-coarsened marginal.

    The verdict is "violated" when some marginal is not strictly below
    the parent (margin 1e-9). One power-residual curve is kept per number
    of surviving blocks; for three parties that is the pair-marginal sum,
    for four parties the triple-marginal and pair-marginal sums.
    """
    grid = _check_grid(alpha_grid)
    cfg = cfg or RoofConfig()
    parent = _parent(state, partition)
    spec = spec.as_genuine() if not spec.gated else spec
    vacuous, cert = _vacuity(state, parent, cfg)
    if vacuous:
        return _vacuous_report(state_id, spec, "complete", state, parent, grid, cert, cfg)
    labels = _labels(state)
    value_of = _Values(spec, state, cfg)
    parent_value, parent_exact = value_of(parent)
    children = []
    for child in coarsenings(parent, Coarsen.DISCARD, min_blocks=2):
        if not is_coarser(parent, child, Coarsen.DISCARD):
            raise AssertionError(f"{child} is not a discard coarsening of {parent}")
        value, exact = value_of(child)
        children.append(ChildValue(child, value, exact, "discard"))
    curves = []
    for k in sorted({c.partition.k for c in children}, reverse=True):
        group = [(c.partition.format(labels), c.value) for c in children if c.partition.k == k]
        curves.append(_curve(f"level-{k}", parent_value, group, grid, strict=True))
    violated = any(c.value >= parent_value - STRICT_MARGIN for c in children)
    report = MonogamyReport(
        state_id, spec, "complete", labels, parent, parent_value, parent_exact, children,
        grid, curves, "violated" if violated else "consistent", False,
        certificate=cert, roof_config=cfg.to_dict(),
    )
    return _escalate(report, audit_complete, spec, state, alpha_grid, cfg, partition,
                     state_id, escalate)


def _exact_evidence(report: MonogamyReport) -> bool:
    """Whether some violation rests on exactly computed values only."""
    if report.verdict != "violated" or not report.parent_exact:
        return False
    exact = {c.partition.format(report.labels): c.exact for c in report.children}
    if report.mode == "tight":
        return any(h.status == "violated" and exact[h.child] for h in report.hierarchy)
    return any(c.exact and c.value >= report.parent_value - STRICT_MARGIN
               for c in report.children)


def _escalate(report, audit, spec, state, alpha_grid, cfg, partition, state_id, escalate):
    """Re-audit a roof-dependent violation with more restarts before reporting it."""
    if report.verdict != "violated" or _exact_evidence(report):
        return report
    if escalate:
        report = audit(spec, state, alpha_grid, cfg.scaled(ESCALATION), partition,
                       state_id, escalate=False)
        report.escalated = True
    report.possibly_optimizer_artifact = (
        report.verdict == "violated" and not _exact_evidence(report)
    )
    return report


# --------------------------------------------------------------------------- #
# tight complete monogamy

def _check_tight_family(spec: MeasureSpec) -> None:
    # GMC is admitted as the reference counterexample even though it is not complete
    if spec.family is Family.GMC:
        return
    if spec.family not in COMPLETE:
        raise InvalidArgumentError(
            f"tight monogamy is defined for complete families, not {spec.family.value}"
        )


def audit_tight(
    spec: MeasureSpec,
    state: State,
    alpha_grid=None,
    cfg: RoofConfig | None = None,
    partition: Partition | None = None,
    state_id: str = "state",
    escalate: bool = True,
) -> MonogamyReport:
    """Genuine value of the whole state against every block-combined view.

    Each combined view is classified by the residual ``parent - child``:
    above 1e-9 is strict, below -1e-4 violates the hierarchy, and anything
    between counts as equality, which passes only if every member of the
    Xi set has a vanishing value (at most 1e-3). For three parties the
    curves ``E^a(ABC) - E^a(XY) - E^a(XY|Z)`` are also recorded.
    """
    _check_tight_family(spec)
    grid = _check_grid(alpha_grid)
    cfg = cfg or RoofConfig()
    parent = _parent(state, partition)
    spec = spec.as_genuine() if not spec.gated else spec
    vacuous, cert = _vacuity(state, parent, cfg)
    if vacuous:
        return _vacuous_report(state_id, spec, "tight", state, parent, grid, cert, cfg)
    labels = _labels(state)
    value_of = _Values(spec, state, cfg)
    parent_value, parent_exact = value_of(parent)
    children, checks = [], []
    for child in coarsenings(parent, Coarsen.COMBINE, min_blocks=2):
        if not is_coarser(parent, child, Coarsen.COMBINE):
            raise AssertionError(f"{child} is not a combine coarsening of {parent}")
        value, exact = value_of(child)
        children.append(ChildValue(child, value, exact, "combine"))
        residual = parent_value - value
        name = child.format(labels)
        if residual > STRICT_MARGIN:
            checks.append(HierarchyCheck(name, residual, "strict"))
        elif residual < -EQUALITY_TOL:
            checks.append(HierarchyCheck(name, residual, "violated"))
        else:
            checks.append(_xi_check(value_of, parent, child, name, residual, labels))
    curves = []
    if parent.k == 3:
        for pair in coarsenings(parent, Coarsen.DISCARD, min_blocks=2):
            merged = Partition([[i for b in pair.blocks for i in b]] + [
                b for b in parent.blocks if not set(b) & pair.support
            ])
            value, exact = value_of(pair)
            children.append(ChildValue(pair, value, exact, "discard"))
            terms = [(pair.format(labels), value), (merged.format(labels), _lookup(children, merged))]
            curves.append(_curve(f"{pair.format(labels)}+{merged.format(labels)}",
                                 parent_value, terms, grid, strict=False))
    failed = any(h.status == "violated" or h.xi_vanish is False for h in checks)
    report = MonogamyReport(
        state_id, spec, "tight", labels, parent, parent_value, parent_exact, children,
        grid, curves, "violated" if failed else "consistent", False, checks,
        certificate=cert, roof_config=cfg.to_dict(),
    )
    return _escalate(report, audit_tight, spec, state, alpha_grid, cfg, partition,
                     state_id, escalate)


def _lookup(children: list[ChildValue], part: Partition) -> float:
    for c in children:
        if c.partition == part:
            return c.value
    raise KeyError(str(part))


def _xi_check(value_of, parent, child, name, residual, labels) -> HierarchyCheck:
    """Equality case: evaluate Xi-set members until one fails to vanish."""
    values = {}
    vanish = True
    for gamma in xi_set(parent, child):
        value, _ = value_of(gamma)
        values[gamma.format(labels)] = value
        if value > LEFTOVER_TOL:
            vanish = False
            break
    return HierarchyCheck(name, residual, "equality", values, vanish)


# --------------------------------------------------------------------------- #
# disentangling conditions

_DISENTANGLING_MODES = ("bipartite", "complete", "tight")


def audit_disentangling(
    spec: MeasureSpec,
    state: State,
    mode: str = "bipartite",
    cfg: RoofConfig | None = None,
    order: Sequence[int] = (0, 1, 2),
    state_id: str = "state",
) -> DisentanglingReport:
    """Tripartite equality conditions and the marginals they force to vanish.

    With parties relabelled as ``A, B, C = order``:

    * ``bipartite``: ``E(A|BC) = E(AB)`` forces ``E(AC) = 0``;
    * ``complete``: ``E(A|B|C) = E(AB)`` forces ``E(AC) = E(BC) = 0``;
    * ``tight``: ``E(A|B|C) = E(A|BC)`` forces ``E(BC) = 0``.

    The condition counts as triggered when the two sides agree within
    1e-4; leftovers must then be at most 1e-3.
    """
    if mode not in _DISENTANGLING_MODES:
        raise InvalidArgumentError(f"mode must be one of {_DISENTANGLING_MODES}")
    if state.shape.m != 3:
        raise InvalidArgumentError("disentangling conditions are tripartite")
    if sorted(order) != [0, 1, 2]:
        raise InvalidArgumentError("order must be a permutation of (0, 1, 2)")
    cfg = cfg or RoofConfig()
    a, b, c = order
    labels = _labels(state)
    ab, ac, bc = Partition([[a], [b]]), Partition([[a], [c]]), Partition([[b], [c]])
    a_bc = Partition([[a], [b, c]])
    abc = Partition([[a], [b], [c]])
    if mode == "bipartite":
        lhs, rhs, rest = a_bc, ab, [ac]
    elif mode == "complete":
        lhs, rhs, rest = abc, ab, [ac, bc]
    else:
        lhs, rhs, rest = abc, a_bc, [bc]
    lhs_spec = spec if lhs.k == 3 else spec.plain()

    def value(part: Partition, s: MeasureSpec) -> float:
        return evaluate(s, state, part, cfg).value

    lv = value(lhs, lhs_spec)
    rv = value(rhs, spec.plain())
    residual = lv - rv
    triggered = abs(residual) <= EQUALITY_TOL
    leftovers = {}
    verdict = "inapplicable"
    if triggered:
        leftovers = {p.format(labels): value(p, spec.plain()) for p in rest}
        verdict = ("monogamy-consistent" if all(v <= LEFTOVER_TOL for v in leftovers.values())
                   else "violated")
    return DisentanglingReport(
        state_id, spec, mode, (lhs.format(labels), lv), (rhs.format(labels), rv),
        residual, triggered, leftovers, verdict,
    )


# --------------------------------------------------------------------------- #
# campaigns

CAMPAIGN_ROOF = RoofConfig(restarts=1, max_iters=100)


@dataclass
class CampaignResult:
    spec: MeasureSpec
    shape: SystemShape
    mode: str
    n_samples: int
    seed: int
    alpha_grid: tuple[float, ...]
    vacuous: int
    violations: list[int]
    escalated: int
    alpha_star_counts: dict[str, int]
    worst_index: int | None
    worst_margin: float | None
    worst_state: PureState | None
    violating_states: dict[int, PureState]
    roof_config: dict

    def to_dict(self) -> dict:
        from .io import state_to_dict

        return {
            "schema": SCHEMA_VERSION,
            "kind": "campaign",
            "mode": self.mode,
            "spec": self.spec.to_dict(),
            "shape": {"dims": list(self.shape.dims), "labels": list(self.shape.labels)},
            "n_samples": self.n_samples,
            "seed": self.seed,
            "alpha_grid": list(self.alpha_grid),
            "vacuous": self.vacuous,
            "violations": len(self.violations),
            "violation_indices": self.violations,
            "escalated": self.escalated,
            "alpha_star_counts": self.alpha_star_counts,
            "worst": {
                "index": self.worst_index,
                "margin": self.worst_margin,
                "state": None if self.worst_state is None else state_to_dict(self.worst_state),
            },
            "roof_config": self.roof_config,
        }


_AUDITS = {"complete": audit_complete, "tight": audit_tight}


def campaign_seeds(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def campaign(
    spec: MeasureSpec,
    shape: SystemShape,
    n_samples: int,
    seed: int = 0,
    alpha_grid=None,
    mode: str = "complete",
    cfg: RoofConfig | None = None,
) -> CampaignResult:
    """Audit ``n_samples`` Haar-random pure states and aggregate the outcomes.

    Sample ``i`` is drawn from the ``i``-th child of ``SeedSequence(seed)``,
    so results do not depend on evaluation order. The worst case is the
    smallest margin, ties going to the lowest index. The default roof
    settings are cheap because child values are upper bounds: a consistent
    verdict stays sound and a violation is re-audited with more restarts.
    """
    if n_samples < 1:
        raise InvalidArgumentError("a campaign needs at least one sample")
    if mode not in _AUDITS:
        raise InvalidArgumentError(f"campaign mode must be one of {sorted(_AUDITS)}")
    grid = _check_grid(alpha_grid)
    cfg = cfg or CAMPAIGN_ROOF
    audit = _AUDITS[mode]
    vacuous = escalated = 0
    violations: list[int] = []
    violating: dict[int, PureState] = {}
    counts: dict[str, int] = {}
    worst = (math.inf, -1)
    worst_state = None
    for idx, rng in enumerate(campaign_seeds(seed, n_samples)):
        psi = random_pure(shape, rng)
        rep = audit(spec, psi, grid, cfg, state_id=f"sample-{idx}")
        if rep.vacuous:
            vacuous += 1
            continue
        escalated += int(rep.escalated)
        if rep.verdict == "violated":
            violations.append(idx)
            violating[idx] = psi
        star = rep.alpha_star
        key = "none" if star is None else repr(star)
        counts[key] = counts.get(key, 0) + 1
        if (rep.margin, idx) < worst:
            worst = (rep.margin, idx)
            worst_state = psi
    return CampaignResult(
        spec, shape, mode, n_samples, seed, grid, vacuous, violations, escalated,
        dict(sorted(counts.items(), key=lambda kv: (kv[0] == "none", kv[0] != "none" and float(kv[0])))),
        None if worst_state is None else worst[1],
        None if worst_state is None else worst[0],
        worst_state, violating, cfg.to_dict(),
    )
