"""Slot-level Monte Carlo simulator of the multichannel handoff system.

Independent second engine: no stationary distributions, no chains — just
N SU pairs and M ON/OFF primary users playing out the coordination
rules slot by slot, so the measured metrics can be compared against the
analytic ones.

Behavioral rules:

* Each channel's PU alternates geometric OFF (parameter p) and ON
  (parameter v(1-p)) dwells; completions precede arrivals at a slot
  boundary, and tracks start in the stationary state.
* Idle and backlogged pairs sit on the common hopping channel
  (slot mod M).  A backlogged pair observes the PU-idle channels
  (optionally minus channels other pairs are transmitting on), runs the
  RTS/CTS exchange within the slot, and selects per the scheme.  A pair
  alone on its pick starts data in the next slot; simultaneous
  same-channel pickers all stay backlogged.
* Pair x powers on (first enters backlog) at slot x rather than all
  pairs starting together: frame timing is deterministic, so a
  simultaneous cold start would phase-lock every pair into the same
  attempt slots for the whole run instead of sampling steady state.
* A transmitting pair sends frames of c slots back-to-back on its
  channel.  A slot overlapping the PU collides; the pair only notices
  after min(t_s, remaining frame slots) overlap slots (base model: at
  frame end), then drops to backlog and later retransmits the same
  frame on a freshly selected channel.  After h clean frames the packet
  is done and the pair goes Idle, re-arming per Bernoulli(s) per slot.
* Only data slots count: per-slot statuses (Idle / Transmitting /
  Collided / Backlogged) are tallied after a warmup, and the four
  counts partition the counted slots exactly.

Reproducibility: one PCG64 stream per PU channel, one per SU pair, and
one for packet arrivals, all spawned from the single 64-bit seed; the
pseudo-random selection scheme additionally derives a shared per-slot
channel permutation from (seed, slot).  Identical config and seed give
bit-identical results.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chains import ValidationError
from .handoff import BACKLOGGED, COLLIDED, IDLE, TRANSMITTING, ModelParams

_PSEUDO_TAG = 0x9E3779B9  # domain separator for the shared slot permutation
_HOP = -1  # channel placeholder for statuses that ride the hopping sequence


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: model parameters plus run controls.

    slots: total simulated slots; warmup: leading slots excluded from
    every measurement; seed: nonnegative 64-bit RNG seed;
    exclude_su_occupied: treat channels that other pairs are
    transmitting on as unavailable during selection (physical carrier
    sense; the analytic model ignores SU occupancy, so comparison runs
    may switch it off); saturated: a new packet is ready the moment one
    completes, regardless of s; trace: record a per-slot
    (slot, pair, status, channel) trace — intended for short debug runs.
    """

    params: ModelParams
    slots: int = 10**6
    warmup: int = 10**5
    seed: int = 1
    exclude_su_occupied: bool = True
    saturated: bool = False
    trace: bool = False

    def __post_init__(self):
        if not isinstance(self.slots, int) or self.slots < 1:
            raise ValidationError(f"slots must be an integer >= 1 (got {self.slots!r})")
        if not isinstance(self.warmup, int) or not 0 <= self.warmup < self.slots:
            raise ValidationError(
                f"warmup must be an integer in [0, slots) (got {self.warmup!r})"
            )
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ValidationError(f"seed must be a nonnegative integer (got {self.seed!r})")


@dataclass(eq=False)
class SimResult:
    """Measured counterparts of the analytic metrics, plus raw tallies.

    The four *_slots arrays hold per-pair status counts over the counted
    window [warmup, slots); they partition it exactly.  theta_sim is the
    fraction of counted slots spent cleanly transmitting (averaged over
    pairs), pr_collision_sim the collided fraction, ds_sim the mean
    length of completed backlog episodes that began inside the window
    (NaN if none completed), and q_hat the fraction of counted slots in
    which two or more pairs picked the same channel.

    delivered_frames counts frames whose c clean slots all lie inside
    the window; doomed_clean_slots / partial_clean_slots split the
    remaining clean-transmission slots (frames that later collided,
    and frames cut by a window edge), so that

        sum(transmitting_slots) ==
            sum(delivered_frames) * c + doomed_clean_slots + partial_clean_slots

    holds exactly.
    """

    seed: int
    counted_slots: int
    idle_slots: np.ndarray
    transmitting_slots: np.ndarray
    collided_slots: np.ndarray
    backlogged_slots: np.ndarray
    delivered_frames: np.ndarray
    doomed_clean_slots: int
    partial_clean_slots: int
    theta_sim: float
    pr_collision_sim: float
    ds_sim: float
    q_hat: float
    completed_dwells: int
    collision_slots: int
    trace: Optional[tuple] = None


def _pseudo_order(seed: int, slot: int, m: int) -> np.ndarray:
    """The shared channel permutation all pairs derive for one slot."""
    ss = np.random.SeedSequence((seed, _PSEUDO_TAG, slot))
    return np.random.Generator(np.random.PCG64(ss)).permutation(m)


def select_channel(
    scheme: str,
    available,
    rng: np.random.Generator,
    slot_index: int,
    *,
    seed: int = 0,
    rank: int = 0,
    m: Optional[int] = None,
) -> Optional[int]:
    """One pair's channel pick for a slot; None when nothing is available.

    random — uniform over the available channels, from the pair's own
    stream.  greedy — the common deterministic tie-break (lowest index),
    identical for every pair selecting in that slot, hence certain SU-SU
    collisions whenever two attempt together.  pseudorandom — the
    available channels are taken in the order of the shared per-slot
    permutation over the m channels, derived from (seed, slot_index),
    and the pair at arrival-order ``rank`` gets the rank-th one; a rank
    beyond the last available channel finds no channel this slot (None),
    so simultaneous attempters never share a pick.
    """
    available = np.asarray(available, dtype=int)
    if available.size == 0:
        return None
    if scheme == "random":
        return int(available[int(rng.integers(available.size))])
    if scheme == "greedy":
        return int(available.min())
    if scheme == "pseudorandom":
        if m is None:
            m = int(available.max()) + 1
        wanted = set(available.tolist())
        ordered = [int(ch) for ch in _pseudo_order(seed, slot_index, m) if ch in wanted]
        return ordered[rank] if rank < len(ordered) else None
    raise ValidationError(f"unknown scheme {scheme!r}")


def _pu_track(rng: np.random.Generator, n: int, p: float, v: float) -> np.ndarray:
    """Busy/idle track of one channel for n slots, started stationary.

    Alternates geometric OFF (parameter p) and ON (parameter v(1-p))
    dwells.  Geometric dwells are memoryless, so starting a fresh dwell
    from a stationarily drawn state is exactly stationary.
    """
    out = np.zeros(n, dtype=bool)
    if p == 0.0:
        return out
    release = v * (1.0 - p)  # busy -> idle, completions before arrivals
    busy = bool(rng.random() < p / (p + release))
    if release == 0.0:
        # Once busy the channel never frees up (p = 1 in practice).
        if busy:
            out[:] = True
        else:
            d = min(int(rng.geometric(p)), n)
            out[d:] = True
        return out
    pos = 0
    cycles_per_slot = p * release / (p + release)
    while pos < n:
        k = max(16, int((n - pos) * cycles_per_slot * 1.5) + 8)
        dwells = np.empty(2 * k, dtype=np.int64)
        if busy:
            dwells[0::2] = rng.geometric(release, size=k)
            dwells[1::2] = rng.geometric(p, size=k)
            vals = np.tile(np.array([True, False]), k)
        else:
            dwells[0::2] = rng.geometric(p, size=k)
            dwells[1::2] = rng.geometric(release, size=k)
            vals = np.tile(np.array([False, True]), k)
        seg = np.repeat(vals, dwells)
        take = min(seg.size, n - pos)
        out[pos : pos + take] = seg[:take]
        pos += take
        # An even number of dwells was consumed, so the phase repeats.
    return out


def _spawn_streams(seed: int, m: int, n: int):
    children = np.random.SeedSequence(seed).spawn(m + n + 1)
    pu = [np.random.Generator(np.random.PCG64(ss)) for ss in children[:m]]
    pairs = [np.random.Generator(np.random.PCG64(ss)) for ss in children[m : m + n]]
    arrivals = np.random.Generator(np.random.PCG64(children[m + n]))
    return pu, pairs, arrivals


def pu_busy_matrix(params: ModelParams, slots: int, seed: int) -> np.ndarray:
    """The (M, slots) PU busy matrix a run with this seed would see.

    Exposed so the PU process can be checked against the occupancy
    chain without running a full simulation.
    """
    pu_rngs, _, _ = _spawn_streams(seed, params.M, params.N)
    return np.vstack([_pu_track(r, slots, params.p, params.v) for r in pu_rngs])


class _Sim:
    """Mutable state of one simulation run (see :func:`run`)."""

    def __init__(self, config: SimConfig):
        self.cfg = config
        pm = config.params
        self.M, self.N = pm.M, pm.N
        self.c, self.h, self.t_s = pm.c, pm.h, pm.t_s
        self.p, self.s = pm.p, pm.s
        self.scheme = pm.scheme
        self.slots, self.warmup = config.slots, config.warmup

        pu_rngs, self.pair_rngs, self.arrival_rng = _spawn_streams(
            config.seed, self.M, self.N
        )
        self.busy = np.vstack(
            [_pu_track(r, self.slots, self.p, pm.v) for r in pu_rngs]
        )

        n = self.N
        # Staggered power-on: pair x first attempts in slot x (see module
        # docstring); earlier slots are idle time on the hopping sequence.
        self.next_t = np.arange(n, dtype=np.int64)  # when the pair is next backlogged
        self.entry = np.arange(n, dtype=np.int64)  # current backlog episode start
        self.frame_k = np.ones(n, dtype=np.int64)
        self.occ_ch = np.full(n, -1, dtype=np.int64)
        self.occ_from = np.zeros(n, dtype=np.int64)
        self.occ_until = np.zeros(n, dtype=np.int64)

        self.counts = {st: np.zeros(n, dtype=np.int64) for st in
                       (IDLE, TRANSMITTING, COLLIDED, BACKLOGGED)}
        self.delivered = np.zeros(n, dtype=np.int64)
        self.doomed_clean = 0
        self.partial_clean = 0
        self.dwell_sum = 0
        self.dwell_n = 0
        self.collision_slots = 0
        self.segments = [] if config.trace else None
        for x in range(1, n):
            self._count(x, IDLE, 0, min(x, self.slots), _HOP)

    # -- bookkeeping -------------------------------------------------

    def _count(self, x: int, status: str, start: int, end: int, ch: int):
        lo = max(start, self.warmup)
        hi = min(end, self.slots)
        if hi > lo:
            self.counts[status][x] += hi - lo
        if self.segments is not None and min(end, self.slots) > start:
            self.segments.append((start, min(end, self.slots), x, status, ch))

    def _window_overlap(self, start: int, end: int) -> int:
        return max(0, min(end, self.slots) - max(start, self.warmup))

    # -- pair evolution ----------------------------------------------

    def _idle_dwell(self) -> Optional[int]:
        """Idle slots between packet completion and the next arrival."""
        if self.cfg.saturated or self.s == 1.0:
            return 0
        if self.s == 0.0:
            return None  # no further packet, idle to the end
        if self.arrival_rng.random() < self.s:
            return 0
        return int(self.arrival_rng.geometric(self.s))

    def _enter_backlog(self, x: int, t: int):
        self.next_t[x] = t
        self.entry[x] = t

    def _roll(self, x: int, ch: int, t_sel: int):
        """Play the pair forward from winning channel ch in slot t_sel.

        Frames are resolved in bulk against the PU track until the pair
        either returns to backlog (collision sensed or new packet) or
        the simulation horizon cuts it off.  Nothing here depends on
        other pairs: once transmitting, SU pairs do not disturb each
        other.
        """
        c, h, slots = self.c, self.h, self.slots
        k = int(self.frame_k[x])
        t0 = t_sel + 1
        self.occ_ch[x] = ch
        self.occ_from[x] = t0
        track = self.busy[ch]
        while True:
            if t0 >= slots:
                self.next_t[x] = slots
                self.occ_until[x] = slots
                return
            end = min(t0 + c, slots)
            win = track[t0:end]
            onset = int(np.argmax(win)) if win.any() else -1
            if onset < 0 and end - t0 == c:
                # Clean full frame.
                self._count(x, TRANSMITTING, t0, t0 + c, ch)
                if t0 >= self.warmup:
                    self.delivered[x] += 1
                else:
                    self.partial_clean += self._window_overlap(t0, t0 + c)
                if k < h:
                    k += 1
                    self.frame_k[x] = k
                    t0 += c
                    continue
                # Packet complete.
                self.frame_k[x] = 1
                t_end = t0 + c
                self.occ_until[x] = t_end
                d = self._idle_dwell()
                if d is None:
                    self._count(x, IDLE, t_end, slots, _HOP)
                    self.next_t[x] = slots
                    return
                if d:
                    self._count(x, IDLE, t_end, t_end + d, _HOP)
                self._enter_backlog(x, t_end + d)
                return
            if onset < 0:
                # Clean so far, but the horizon cut the frame short.
                self._count(x, TRANSMITTING, t0, end, ch)
                self.partial_clean += self._window_overlap(t0, end)
                self.next_t[x] = slots
                self.occ_until[x] = slots
                return
            # PU came back: frame is doomed, pair senses it after the
            # overlap run and retransmits the same frame later.
            if onset > 0:
                self._count(x, TRANSMITTING, t0, t0 + onset, ch)
                self.doomed_clean += self._window_overlap(t0, t0 + onset)
            run = min(self.t_s, c - onset)
            self._count(x, COLLIDED, t0 + onset, t0 + onset + run, ch)
            t_b = t0 + onset + run
            self.occ_until[x] = min(t_b, slots)
            self._enter_backlog(x, t_b)
            return

    # -- the slot loop -----------------------------------------------

    def _available(self, t: int) -> np.ndarray:
        mask = ~self.busy[:, t]
        if self.cfg.exclude_su_occupied:
            for y in range(self.N):
                if self.occ_ch[y] >= 0 and self.occ_from[y] <= t < self.occ_until[y]:
                    mask[self.occ_ch[y]] = False
        return np.flatnonzero(mask)

    def _process_slot(self, t: int, attempting: list):
        for x in attempting:
            self._count(x, BACKLOGGED, t, t + 1, _HOP)
        avail = self._available(t)
        if avail.size == 0:
            return
        exits = []
        if self.scheme == "greedy":
            if len(attempting) == 1:
                exits = [(attempting[0], int(avail[0]))]
            elif t >= self.warmup:
                self.collision_slots += 1
        elif self.scheme == "pseudorandom":
            order = _pseudo_order(self.cfg.seed, t, self.M)
            in_order = [int(ch) for ch in order if not self.busy[ch, t]]
            if self.cfg.exclude_su_occupied:
                allowed = set(avail.tolist())
                in_order = [ch for ch in in_order if ch in allowed]
            ranked = sorted(attempting, key=lambda x: (self.entry[x], x))
            # Ranks past the last available channel get nothing this slot
            # and stay backlogged; nobody ever shares a pick.
            for r, x in enumerate(ranked[: len(in_order)]):
                exits.append((x, in_order[r]))
        else:  # random
            picks = {}
            hits = np.zeros(self.M, dtype=np.int64)
            for x in attempting:
                ch = select_channel("random", avail, self.pair_rngs[x], t)
                picks[x] = ch
                hits[ch] += 1
            if np.any(hits >= 2) and t >= self.warmup:
                self.collision_slots += 1
            exits = [(x, picks[x]) for x in attempting if hits[picks[x]] == 1]
        for x, ch in exits:
            if self.entry[x] >= self.warmup:
                self.dwell_sum += t - int(self.entry[x]) + 1
                self.dwell_n += 1
            self._roll(x, ch, t)

    def run(self) -> SimResult:
        t = 0
        slots = self.slots
        next_t = self.next_t
        while t < slots:
            attempting = [x for x in range(self.N) if next_t[x] <= t]
            if not attempting:
                nxt = int(next_t.min())
                if nxt <= t:  # pragma: no cover - defensive
                    raise RuntimeError("slot loop failed to advance")
                t = nxt
                continue
            self._process_slot(t, attempting)
            t += 1
        return self._result()

    def _result(self) -> SimResult:
        counted = self.slots - self.warmup
        n = self.N
        theta = float(self.counts[TRANSMITTING].sum() / (n * counted))
        prc = float(self.counts[COLLIDED].sum() / (n * counted))
        ds = self.dwell_sum / self.dwell_n if self.dwell_n else float("nan")
        trace = None
        if self.segments is not None:
            rows = []
            for start, end, x, status, ch in self.segments:
                for t in range(start, end):
                    rows.append((t, x, status, ch if ch >= 0 else t % self.M))
            rows.sort(key=lambda r: (r[0], r[1]))
            trace = tuple(rows)
        return SimResult(
            seed=self.cfg.seed,
            counted_slots=counted,
            idle_slots=self.counts[IDLE].copy(),
            transmitting_slots=self.counts[TRANSMITTING].copy(),
            collided_slots=self.counts[COLLIDED].copy(),
            backlogged_slots=self.counts[BACKLOGGED].copy(),
            delivered_frames=self.delivered.copy(),
            doomed_clean_slots=self.doomed_clean,
            partial_clean_slots=self.partial_clean,
            theta_sim=theta,
            pr_collision_sim=prc,
            ds_sim=float(ds),
            q_hat=float(self.collision_slots / counted),
            completed_dwells=self.dwell_n,
            collision_slots=self.collision_slots,
            trace=trace,
        )


def run(config: SimConfig) -> SimResult:
    """Simulate one configuration and measure the metrics.

    Deterministic in (config, seed): running twice gives bit-identical
    results.  See the module docstring for the behavioral rules.
    """
    return _Sim(config).run()
