"""
Per-clip motion candidate sets: single cells, cell combinations, dedup and fallback
"""

from concurrent.futures import Executor
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from rigidpath.candidates.cell_grid import CellGrid
from rigidpath.candidates.ransac import ClipContext, RansacParams, propose_cell_motion, work_rng
from rigidpath.clips import Clip
from rigidpath.geometry import GeometryParams, RigidMotion
from rigidpath.trajcore import TrackArray

ORIGIN_CELL = "cell"
ORIGIN_COMBO = "combo"
ORIGIN_FALLBACK = "global-fallback"

# work-item keys that cannot collide with cell index tuples
_COMBO_DRAW_KEY = ()
_FALLBACK_KEY = (0, 0)


def _map(executor: Optional[Executor], fn: Callable, items: Sequence) -> list:
    if executor is None:
        return [fn(item) for item in items]
    return list(executor.map(fn, items))


def jaccard(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def deduplicate(motions: Sequence[RigidMotion], threshold: float = 0.9) -> List[RigidMotion]:
    """
    Drop near-identical candidates

    Two candidates are duplicates when the Jaccard similarity of their member
    sets exceeds `threshold`; the larger one survives, the earlier on ties.
    Survivors keep their proposal order.
    """
    order = sorted(range(len(motions)), key=lambda i: (-len(motions[i].member_ids), i))
    kept: List[int] = []
    for i in order:
        if all(jaccard(motions[i].member_ids, motions[k].member_ids) <= threshold for k in kept):
            kept.append(i)
    return [motions[i] for i in sorted(kept)]


def _consistent(a: RigidMotion, b: RigidMotion, ratio: float) -> bool:
    """
    At least `ratio` of each motion's members are inliers under the other's matrices

    Members of a candidate are exactly the visible trajectories of the clip
    that pass the membership test under its matrices, so the inlier share of
    a's members under b is the share of a's members that b also holds.
    """
    common = len(a.member_ids & b.member_ids)
    return (common >= ratio * len(a.member_ids) and common >= ratio * len(b.member_ids)
            and common > 0)


def _consistent_combos(accepted: Dict[int, RigidMotion], params: RansacParams) -> List[Tuple[int, ...]]:
    cells = sorted(accepted)
    linked = {(a, b) for a, b in combinations(cells, 2)
              if _consistent(accepted[a], accepted[b], params.consistency_ratio)}
    combos: List[Tuple[int, ...]] = []
    for size in range(2, params.max_combo + 1):
        for combo in combinations(cells, size):
            if all(pair in linked for pair in combinations(combo, 2)):
                combos.append(combo)
                if len(combos) >= params.max_consistent_combos:
                    return combos
    return combos


def _random_combos(candidates: Sequence[int], params: RansacParams, rng: np.random.Generator,
                   seen: set) -> List[Tuple[int, ...]]:
    pool = np.asarray(candidates)
    largest = min(params.max_combo, len(pool))
    combos: List[Tuple[int, ...]] = []
    if largest < 2:
        return combos
    for _ in range(4 * params.combo_budget):
        if len(combos) >= params.combo_budget:
            break
        size = int(rng.integers(2, largest + 1))
        combo = tuple(sorted(int(c) for c in rng.choice(pool, size=size, replace=False)))
        if combo not in seen:
            seen.add(combo)
            combos.append(combo)
    return combos


def propose_clip_candidates(clip: Clip, tracks: TrackArray, grid: CellGrid,
                            geometry: GeometryParams, params: RansacParams,
                            executor: Optional[Executor] = None) -> List[RigidMotion]:
    """
    Motion candidates of one clip

    Every single cell is tried first, then consistent pairs and triples of
    accepted cells, then `combo_budget` random combinations of accepted
    cells. A combination already explained by an existing candidate is
    skipped. Accepted motions carry every visible member of the clip, not
    only the full-length ones. When nothing is accepted a single clip-wide
    RANSAC with the threshold waived yields a `global-fallback` candidate.

    Args:
        clip: The clip
        tracks: Dense positions of all trajectories
        grid: Cells laid over the clip's first frame
        geometry: Membership test parameters
        params: RANSAC and combination parameters
        executor: Optional pool for region-level parallelism

    Returns:
        Non-empty list of candidates in proposal order
    """
    context = ClipContext(clip, tracks, geometry)
    full_ids = context.full_ids
    start_points = context.start_points()
    cell_masks = np.array([cell.contains(start_points) for cell in grid.cells],
                          dtype=bool).reshape(len(grid), len(full_ids))

    def run(combo: Tuple[int, ...]) -> Optional[RigidMotion]:
        mask = np.logical_or.reduce(cell_masks[list(combo)], axis=0)
        return propose_cell_motion(
            context, full_ids[mask], params,
            work_rng(params.rng_seed, clip.index, combo),
            origin=ORIGIN_CELL if len(combo) == 1 else ORIGIN_COMBO,
            cell_origin="+".join(grid.cells[c].origin for c in combo),
        )

    populated = [c for c in range(len(grid)) if cell_masks[c].sum() >= params.sample_size]
    singles = _map(executor, run, [(c,) for c in populated])
    accepted = {c: motion for c, motion in zip(populated, singles) if motion is not None}
    motions: List[RigidMotion] = list(accepted.values())

    tried = covered = 0
    if params.max_combo >= 2 and len(full_ids):
        seen = set()
        rounds = [_consistent_combos(accepted, params)]
        seen.update(rounds[0])
        rounds.append(_random_combos(sorted(accepted), params,
                                     work_rng(params.rng_seed, clip.index, _COMBO_DRAW_KEY), seen))
        for combos in rounds:
            pending = []
            member_masks = np.array([np.isin(full_ids, list(m.member_ids)) for m in motions],
                                    dtype=bool).reshape(len(motions), len(full_ids))
            for combo in combos:
                union = np.logical_or.reduce(cell_masks[list(combo)], axis=0)
                size = np.count_nonzero(union)
                explained = (member_masks & union).sum(axis=1)
                if size and (explained > params.inlier_ratio_accept * size).any():
                    covered += 1
                    continue
                pending.append(combo)
            tried += len(pending)
            motions.extend(m for m in _map(executor, run, pending) if m is not None)

    motions = deduplicate(motions, params.dedup_jaccard)
    if not motions:
        motions = [global_fallback(context, params)]

    logger.debug(f"Clip {clip.index}: {len(accepted)}/{len(populated)} cells accepted, "
                 f"{tried} combinations tried, {covered} already covered, {len(motions)} candidates")
    return motions


def global_fallback(context: ClipContext, params: RansacParams) -> RigidMotion:
    """Clip-wide RANSAC keeping the best consensus, or an empty motion if none exists"""
    clip = context.clip
    motion = propose_cell_motion(context, context.full_ids, params,
                                 work_rng(params.rng_seed, clip.index, _FALLBACK_KEY),
                                 accept=False, origin=ORIGIN_FALLBACK, cell_origin="-")
    if motion is None:
        logger.warning(f"Clip {clip.index}: no estimable motion among {len(context.full_ids)} "
                       f"full-length trajectories, using an empty candidate")
        return RigidMotion(clip.index, {}, origin=ORIGIN_FALLBACK)
    logger.warning(f"Clip {clip.index}: no cell accepted, global fallback with "
                   f"{len(motion.member_ids)} members")
    return motion


def format_candidate_dump(candidates: Sequence[Sequence[RigidMotion]]) -> str:
    """Render candidates as `clip cell_origin n_members origin_tag` lines"""
    return "".join(
        f"{m.clip_index} {m.cell_origin} {len(m.member_ids)} {m.origin}\n"
        for motions in candidates for m in motions
    )
