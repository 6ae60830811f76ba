"""Network decomposition, 4-slot shift schedule and the long-range MIMO bound.

The square is cut into ``l x l`` subnetworks. Slot 0 uses the base grid;
slots 1-3 shift it by ``(l/2, 0)``, ``(0, l/2)`` and ``(l/2, l/2)``, with
border subnetworks clipped to the square. A pair is served in the first
slot where both endpoints share a subnetwork; otherwise it is marked
``FALLBACK`` and left to multihop routing.

Each active subnetwork of a slot is scored by one MIMO link between a
cluster around a served source and a cluster around its destination. The
representative pair is drawn afresh in every trial, as are the phases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClusterSizeError, ConfigurationError, DegeneratePairError, NumericError
from .geometry import STREAM_CLUSTER, STREAM_PHASES, Deployment, substream
from .social import SocialAssignment

FALLBACK = -1
N_SLOTS = 4


def slot_shifts(side: float) -> tuple:
    h = side / 2
    return ((0.0, 0.0), (h, 0.0), (0.0, h), (h, h))


def _axis_index(coord: np.ndarray, shift: float, side: float, L: float) -> tuple[np.ndarray, int, int]:
    # index -1 is the clipped strip [0, shift) left by a positive shift
    lo = -1 if shift > 0 else 0
    hi = max(lo, math.ceil((L - shift) / side - 1e-9) - 1)
    idx = np.floor((coord - shift) / side).astype(np.int64)
    return np.clip(idx, lo, hi), lo, hi


@dataclass(frozen=True)
class SlotGrid:
    shift: tuple
    col_range: tuple
    row_range: tuple
    node_cells: np.ndarray = field(repr=False)
    node_subnet: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.col_range[1] - self.col_range[0] + 1,
                self.row_range[1] - self.row_range[0] + 1)

    @property
    def n_subnets(self) -> int:
        nx, ny = self.shape
        return nx * ny

    def counts(self) -> np.ndarray:
        return np.bincount(self.node_subnet, minlength=self.n_subnets)


@dataclass(frozen=True)
class SubnetworkPlan:
    side: float
    side_length: float
    n: int
    slots: tuple = field(repr=False)

    @property
    def slot_shifts(self) -> tuple:
        return tuple(s.shift for s in self.slots)

    @property
    def expected_nodes(self) -> float:
        """``m = n l**2 / L**2``."""
        return self.n * (self.side / self.side_length) ** 2

    @property
    def base_subnets(self) -> int:
        return self.slots[0].n_subnets

    def subnet_of(self, slot: int, node: int) -> int:
        return int(self.slots[slot].node_subnet[node])

    def members(self, slot: int, subnet: int) -> np.ndarray:
        return np.flatnonzero(self.slots[slot].node_subnet == subnet)


def decompose(d: Deployment, side: float) -> SubnetworkPlan:
    L = d.side_length
    if not (side > 0 and side <= L * (1 + 1e-12)):
        raise ConfigurationError(f"subnetwork side must be in (0, L], got {side}")
    side = min(float(side), L)
    slots = []
    for sx, sy in slot_shifts(side):
        cx, cx_lo, cx_hi = _axis_index(d.positions[:, 0], sx, side, L)
        cy, cy_lo, cy_hi = _axis_index(d.positions[:, 1], sy, side, L)
        ny = cy_hi - cy_lo + 1
        flat = (cx - cx_lo) * ny + (cy - cy_lo)
        cells = np.stack([cx, cy], axis=1)
        cells.setflags(write=False)
        flat.setflags(write=False)
        slots.append(SlotGrid((sx, sy), (cx_lo, cx_hi), (cy_lo, cy_hi), cells, flat))
    return SubnetworkPlan(side, L, d.n, tuple(slots))


def decompose_by_count(d: Deployment, subnets: int) -> SubnetworkPlan:
    """Decomposition with ``subnets`` base subnetworks (a perfect square)."""
    k = math.isqrt(int(subnets))
    if subnets < 1 or k * k != subnets:
        raise ConfigurationError(f"subnetwork count must be a perfect square, got {subnets}")
    return decompose(d, d.side_length / k)


def assign_slots(plan: SubnetworkPlan, pairs) -> np.ndarray:
    """First slot in which both endpoints share a subnetwork, else ``FALLBACK``."""
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    out = np.full(len(pairs), FALLBACK, dtype=np.int64)
    for slot in range(N_SLOTS - 1, -1, -1):
        sub = plan.slots[slot].node_subnet
        out[sub[pairs[:, 0]] == sub[pairs[:, 1]]] = slot
    return out


@dataclass(frozen=True)
class MimoLink:
    tx_cluster: tuple
    rx_cluster: tuple
    channel: np.ndarray = field(repr=False)

    def __post_init__(self):
        if set(self.tx_cluster) & set(self.rx_cluster):
            raise ConfigurationError("MIMO clusters must be disjoint")
        h = np.asarray(self.channel)
        if h.shape != (len(self.rx_cluster), len(self.tx_cluster)):
            raise ConfigurationError(f"channel shape {h.shape} does not match the clusters")

    @property
    def size(self) -> int:
        return len(self.tx_cluster)


def channel_matrix(positions: np.ndarray, tx, rx, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """``H[k, i] = exp(j theta) / d(rx_k, tx_i)**(alpha/2)``, theta uniform."""
    tx_pos = positions[np.asarray(tx)]
    rx_pos = positions[np.asarray(rx)]
    dist = np.hypot(*(rx_pos[:, None, :] - tx_pos[None, :, :]).transpose(2, 0, 1))
    if np.any(dist == 0):
        raise DegeneratePairError("coincident transmit and receive nodes")
    theta = rng.uniform(0.0, 2 * math.pi, size=dist.shape)
    return np.exp(1j * theta) * dist ** (-alpha / 2)


def build_clusters(positions: np.ndarray, members: np.ndarray, source: int, dest: int,
                   size: int) -> tuple[tuple, tuple]:
    """The ``size`` members nearest each endpoint, contested nodes to the nearer one.

    Both clusters are cut back to the smaller of the two so they match.
    """
    members = np.asarray(members)
    ds = np.hypot(*(positions[members] - positions[source]).T)
    dd = np.hypot(*(positions[members] - positions[dest]).T)
    near_s = members[np.lexsort((members, ds))[:size]]
    near_d = members[np.lexsort((members, dd))[:size]]
    contested = np.intersect1d(near_s, near_d)
    where = {int(m): k for k, m in enumerate(members)}
    to_rx = {int(m) for m in contested if dd[where[int(m)]] < ds[where[int(m)]]}
    tx = [int(m) for m in near_s if int(m) not in to_rx]
    rx = [int(m) for m in near_d if int(m) not in contested or int(m) in to_rx]
    m = min(len(tx), len(rx))
    return tuple(tx[:m]), tuple(rx[:m])


def mimo_capacity(link: MimoLink, per_node_power: float) -> float:
    """``log2 det(I + p H H^H)`` through a Cholesky factor."""
    h = np.asarray(link.channel, dtype=complex)
    if not np.all(np.isfinite(h)):
        raise NumericError("channel has non-finite entries")
    if not per_node_power >= 0:
        raise ConfigurationError(f"power must be >= 0, got {per_node_power}")
    if per_node_power == 0 or h.size == 0:
        return 0.0
    gram = np.eye(h.shape[0]) + per_node_power * (h @ h.conj().T)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"I + pHH^H is not positive definite: {exc}") from None
    return float(2.0 * np.sum(np.log2(np.real(np.diag(chol)))))


def cluster_size(m_sub: int, cluster_fraction: float) -> int:
    return max(1, int(math.floor(cluster_fraction * m_sub + 1e-9)))


@dataclass(frozen=True)
class HcResult:
    total_throughput: float
    slot_throughputs: tuple
    active_subnetworks: tuple
    fallback_fraction: float
    analytic_delay_exponent: float | None = None
    trial_throughputs: np.ndarray = field(default=None, repr=False)
    pair_slots: np.ndarray = field(default=None, repr=False)
    fallback_throughput: float | None = None

    @property
    def stderr(self) -> float:
        t = self.trial_throughputs
        if t is None or len(t) < 2:
            return 0.0
        return float(np.std(t, ddof=1) / math.sqrt(len(t)))


def simulate_hc(d: Deployment, social: SocialAssignment, plan: SubnetworkPlan,
                cluster_fraction: float = 0.5, trials: int = 20,
                analytic_delay_exponent: float | None = None,
                fallback_cell_area: float | None = None) -> HcResult:
    """Sum one MIMO bound per active subnetwork and slot, averaged over phase trials.

    Per trial the total is ``(1/4) * sum over slots and active subnetworks``.
    Fallback pairs are scored by multihop routing only when
    ``fallback_cell_area`` is given.
    """
    if not 0 < cluster_fraction <= 1:
        raise ConfigurationError(f"cluster_fraction must be in (0, 1], got {cluster_fraction}")
    if trials < 1:
        raise ConfigurationError(f"trials must be >= 1, got {trials}")
    cfg = d.config
    pairs = np.array(social.pairs, dtype=np.int64).reshape(-1, 2)
    slots = assign_slots(plan, pairs)

    groups = []  # (slot, subnet, served pair indices, members, cluster size)
    active = []
    for slot in range(N_SLOTS):
        grid = plan.slots[slot]
        served = np.flatnonzero(slots == slot)
        sub_of_pair = grid.node_subnet[pairs[served, 0]]
        subnets = np.unique(sub_of_pair)
        active.append(len(subnets))
        for sub in subnets:
            members = plan.members(slot, int(sub))
            size = cluster_size(len(members), cluster_fraction)
            if len(members) < 2 * size:
                raise ClusterSizeError(
                    f"slot {slot} subnetwork {sub} has {len(members)} nodes, needs {2 * size}")
            groups.append((slot, int(sub), served[sub_of_pair == sub], members, size))

    per_trial = np.zeros((trials, N_SLOTS))
    for trial in range(trials):
        for slot, sub, cand, members, size in groups:
            # representative served pair, redrawn every trial
            pick = substream(cfg.seed, STREAM_CLUSTER, trial, slot, sub).integers(len(cand))
            s, v = pairs[cand[pick]]
            tx, rx = build_clusters(d.positions, members, int(s), int(v), size)
            rng = substream(cfg.seed, STREAM_PHASES, trial, slot, sub)
            link = MimoLink(tx, rx, channel_matrix(d.positions, tx, rx, cfg.path_loss_alpha, rng))
            per_trial[trial, slot] += mimo_capacity(link, cfg.power / link.size)
    trial_totals = per_trial.sum(axis=1) / N_SLOTS

    fallback = slots == FALLBACK
    fb_rate = None
    if fallback_cell_area is not None and fallback.any():
        from .mh import simulate_mh
        fb_rate = simulate_mh(d, social.subset(fallback), fallback_cell_area).aggregate_throughput
    return HcResult(
        total_throughput=float(trial_totals.mean()),
        slot_throughputs=tuple(float(x) for x in per_trial.mean(axis=0) / N_SLOTS),
        active_subnetworks=tuple(active),
        fallback_fraction=float(fallback.mean()) if len(pairs) else 0.0,
        analytic_delay_exponent=analytic_delay_exponent,
        trial_throughputs=trial_totals,
        pair_slots=slots,
        fallback_throughput=fb_rate,
    )


def side_length(mean_sd: float, n: int, epsilon: float, L: float = 1.0) -> float:
    """``min(L, mean_sd * n**epsilon)``."""
    if not mean_sd > 0:
        raise ConfigurationError(f"mean_sd must be positive, got {mean_sd}")
    if not epsilon >= 0:
        raise ConfigurationError(f"epsilon must be >= 0, got {epsilon}")
    return min(L, mean_sd * n ** epsilon)


def hc_power_per_node(plan: SubnetworkPlan, alpha: float, power: float = 1.0) -> float:
    """``(P/n) (l/L)**(alpha - 2)``: per-node power of a subnetwork in dense units."""
    return power / plan.n * (plan.side / plan.side_length) ** (alpha - 2)
