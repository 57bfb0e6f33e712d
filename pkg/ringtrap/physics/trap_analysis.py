"""Locates trap minima and escape saddles in a sampled potential and
derives depths, trap frequencies and principal axes.
"""

import heapq
import numpy as np
from ringtrap.constants import K_B, OPEN_TRAP_DEPTH_THRESHOLD
from ringtrap.models.errors import OpenTrapError
from ringtrap.models.potential import PotentialGrid, TrapReport
from ringtrap.models.species import AtomSpecies
from scipy import ndimage
from typing import Callable, List, Optional, Sequence, Tuple

LOWEST_SITE = 'lowest'
SURFACE_SITE = 'surface'
MAX_NEWTON_STEPS = 10
TRANSVERSE_AXES = (0, 2)
Index = Tuple[int, int, int]


def _filter_modes(U: PotentialGrid) -> Tuple[str, str, str]:
    return ("nearest", "wrap" if U.periodic_l else "nearest", "nearest")


def local_minima(U: PotentialGrid) -> List[Index]:
    """Interior, unmasked grid points no higher than any neighbour.

    Points on the rho and z faces, and on the l faces of a
    non-periodic grid, are excluded, as are points next to the mask.
    """
    values = np.where(U.mask, np.inf, U.values)
    lowest = ndimage.minimum_filter(values, size=3, mode=_filter_modes(U))
    near_mask = ndimage.binary_dilation(U.mask, structure=np.ones((3, 3, 3), dtype=bool))
    candidate = (values == lowest) & np.isfinite(values) & ~near_mask

    candidate[0, :, :] = candidate[-1, :, :] = False
    candidate[:, :, 0] = candidate[:, :, -1] = False
    if not U.periodic_l and U.shape[1] > 1:
        candidate[:, 0, :] = candidate[:, -1, :] = False
    points = [tuple(int(i) for i in p) for p in np.argwhere(candidate)]
    return sorted(points, key=lambda p: U.values[p])


def _shifted(U: PotentialGrid, index: Index, offset: Tuple[int, int, int]) -> Optional[float]:
    position = []
    for axis, (i, d) in enumerate(zip(index, offset)):
        n = U.shape[axis]
        j = i + d
        if axis == 1 and U.periodic_l:
            j %= n
        elif j < 0 or j >= n:
            return None
        position.append(j)
    return float(U.values[tuple(position)])


def _active_axes(U: PotentialGrid) -> List[int]:
    return [axis for axis in range(3) if U.shape[axis] >= 3]


def _derivatives(U: PotentialGrid, index: Index, stride: int) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Central-difference gradient and Hessian with a step of `stride`
    cells. None when the stencil leaves the grid.
    """
    spacing = U.spacings
    axes = _active_axes(U)
    center = float(U.values[index])
    gradient = np.zeros(3)
    hessian = np.zeros((3, 3))

    def unit(axis, amount):
        offset = [0, 0, 0]
        offset[axis] = amount
        return offset

    for a in axes:
        h = stride * spacing[a]
        plus = _shifted(U, index, unit(a, stride))
        minus = _shifted(U, index, unit(a, -stride))
        if plus is None or minus is None:
            return None
        gradient[a] = (plus - minus) / (2 * h)
        hessian[a, a] = (plus - 2 * center + minus) / h ** 2
    for i, a in enumerate(axes):
        for b in axes[i + 1:]:
            corners = []
            for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                offset = [0, 0, 0]
                offset[a] = sa * stride
                offset[b] = sb * stride
                corners.append(_shifted(U, index, offset))
            if any(c is None for c in corners):
                return None
            mixed = (corners[0] - corners[1] - corners[2] + corners[3]) \
                / (4 * stride * spacing[a] * stride * spacing[b])
            hessian[a, b] = hessian[b, a] = mixed
    return gradient, hessian


def hessian_at(U: PotentialGrid, index: Index) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian at a grid point, Richardson-combined from
    one- and two-cell steps when the wider stencil fits.
    """
    fine = _derivatives(U, index, 1)
    if fine is None:
        raise OpenTrapError("The minimum lies on the grid boundary.")
    coarse = _derivatives(U, index, 2)
    if coarse is None:
        return fine
    gradient = (4 * fine[0] - coarse[0]) / 3
    hessian = (4 * fine[1] - coarse[1]) / 3
    return gradient, hessian


def refine_minimum(U: PotentialGrid, index: Index) -> Tuple[Index, np.ndarray, float, np.ndarray]:
    """Newton steps on the local quadratic model. The anchor moves one
    grid point at a time until the step stays within half a cell.

    Returns:
        (tuple): (anchor index, refined position (rho, l, z) in m,
            refined value in J, Hessian in J/m^2).
    """
    spacing = np.array([s if s > 0 else 1.0 for s in U.spacings])
    axes = _active_axes(U)
    current = index
    for _ in range(MAX_NEWTON_STEPS):
        gradient, hessian = hessian_at(U, current)
        step = np.zeros(3)
        try:
            step[axes] = -np.linalg.solve(hessian[np.ix_(axes, axes)], gradient[axes])
        except np.linalg.LinAlgError:
            break
        cells = step / spacing
        if np.all(np.abs(cells) <= 0.5):
            break
        moved = list(current)
        for axis in axes:
            moved[axis] += int(np.clip(np.round(cells[axis]), -1, 1))
        if U.periodic_l:
            moved[1] %= U.shape[1]
        limits = [0, 2] if U.periodic_l else [0, 1, 2]
        if any(moved[a] <= 0 or moved[a] >= U.shape[a] - 1 for a in limits if a in axes):
            break
        current = tuple(moved)

    if np.any(np.abs(step / spacing) > 1.0):
        step = np.zeros(3)
    value = float(U.values[current] + gradient @ step + 0.5 * step @ hessian @ step)
    return current, np.array(U.coordinates(current)) + step, value, hessian


def principal_frequencies(hessian: np.ndarray, mass: float) -> Tuple[np.ndarray, np.ndarray]:
    """Trap frequencies and unit axes ordered (rho', l, z').

    The l axis is the eigenvector with the largest l component; of the
    other two, rho' has the larger rho component.

    Returns:
        ((`np.ndarray`, `np.ndarray`)): Angular frequencies in rad/s,
            and a 3x3 array whose columns are the axes in (rho, l, z).
    """
    eigenvalues, vectors = np.linalg.eigh(hessian)
    remaining = [0, 1, 2]
    l_pick = max(remaining, key=lambda i: abs(vectors[1, i]))
    remaining.remove(l_pick)
    rho_pick = max(remaining, key=lambda i: abs(vectors[0, i]))
    remaining.remove(rho_pick)
    order = [rho_pick, l_pick, remaining[0]]
    frequencies = np.sqrt(np.clip(eigenvalues[order], 0.0, None) / mass)
    vectors = vectors[:, order].copy()
    for j in range(3):
        dominant = int(np.argmax(np.abs(vectors[:, j])))
        if vectors[dominant, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return frequencies, vectors


def _flood(
    values: np.ndarray,
    mask: np.ndarray,
    start: Index,
    periodic_l: bool,
    is_goal: Callable[[Index], bool],
    mask_is_goal: bool) -> Tuple[float, Index]:
    """Priority flood from `start` in order of the highest value met
    along the path, stopping at the first goal sample.
    """
    shape = values.shape
    visited = np.zeros(shape, dtype=bool)
    steps = [(a, d) for a in range(3) if shape[a] > 1 for d in (-1, 1)]

    heap = [(float(values[start]), start, start)]
    while heap:
        level, cell, saddle = heapq.heappop(heap)
        if visited[cell]:
            continue
        visited[cell] = True
        if is_goal(cell):
            return level, saddle
        for axis, d in steps:
            neighbour = list(cell)
            neighbour[axis] += d
            if axis == 1 and periodic_l:
                neighbour[axis] %= shape[axis]
            elif neighbour[axis] < 0 or neighbour[axis] >= shape[axis]:
                continue
            neighbour = tuple(neighbour)
            if visited[neighbour]:
                continue
            if mask[neighbour]:
                if mask_is_goal:
                    return level, saddle
                continue
            value = float(values[neighbour])
            if value > level:
                heapq.heappush(heap, (value, neighbour, neighbour))
            else:
                heapq.heappush(heap, (level, neighbour, saddle))
    return float("inf"), start


def escape_barrier(
    values: np.ndarray,
    mask: np.ndarray,
    start: Index,
    periodic_l: bool = False,
    exit_axes: Optional[Sequence[int]] = None) -> Tuple[float, Index]:
    """Lowest potential level at which `start` connects to an exit.

    A priority flood grows from `start` in order of the highest value
    met along the path. Exits are the faces of `exit_axes` (by default
    every axis except a periodic l axis and axes of length one) and any
    masked sample. Faces of the other axes are walls.

    Returns:
        ((float, tuple)): The barrier level and the index of the
            sample where the best path reaches it.
    """
    shape = values.shape
    if exit_axes is None:
        exit_axes = [a for a in range(3) if not (a == 1 and periodic_l)]
    exit_axes = [a for a in exit_axes if shape[a] > 1 and not (a == 1 and periodic_l)]

    def is_exit(cell):
        return any(cell[a] == 0 or cell[a] == shape[a] - 1 for a in exit_axes)

    return _flood(values, mask, start, periodic_l, is_exit, mask_is_goal=True)


def site_barrier(U: PotentialGrid, anchor: Index, minima: List[Index]) -> Optional[float]:
    """Lowest potential level at which the site at `anchor` connects to
    another local minimum, or None when no other minimum is reachable.

    Minima within one cell of the anchor belong to the same site. A
    periodic l axis is unrolled over three periods so the flood can
    reach the next copy of the site itself. Masked samples are walls.
    """
    values, mask, start = U.values, U.mask, anchor
    candidates = list(minima)
    if U.periodic_l and U.shape[1] > 1:
        n = U.shape[1]
        values = np.concatenate([U.values] * 3, axis=1)
        mask = np.concatenate([U.mask] * 3, axis=1)
        start = (anchor[0], anchor[1] + n, anchor[2])
        candidates = [(m[0], m[1] + k * n, m[2]) for m in minima for k in range(3)]

    targets = {
        m for m in candidates
        if max(abs(a - b) for a, b in zip(m, start)) > 1
    }
    if not targets:
        return None
    level, _ = _flood(values, mask, start, False, lambda cell: cell in targets, mask_is_goal=False)
    return None if np.isinf(level) else level


def _escape_direction(U: PotentialGrid, towards: Tuple[float, float, float]) -> Tuple[float, float, float]:
    center = np.array([
        np.mean(U.rho_samples), np.mean(U.l_samples), np.mean(U.z_samples)])
    direction = np.array(towards) - center
    norm = np.linalg.norm(direction)
    if norm == 0:
        return (0.0, 0.0, 1.0)
    return tuple(float(v) for v in direction / norm)


def _order_candidates(
    U: PotentialGrid,
    minima: List[Index],
    site: str,
    near: Optional[Tuple[float, float, float]],
    max_distance: Optional[float]) -> List[Index]:
    if near is not None:
        def distance(index):
            rho, l, z = U.coordinates(index)
            return float(np.linalg.norm(np.array([rho, l, z]) - np.array(near)))
        if max_distance is not None:
            minima = [m for m in minima if distance(m) <= max_distance]
        return sorted(minima, key=distance)
    if site == SURFACE_SITE:
        return sorted(minima, key=lambda m: (m[2], U.values[m]))
    if site != LOWEST_SITE:
        raise ValueError(f"Unknown trap site selector '{site}'.")
    return minima


def analyze_trap(
    U: PotentialGrid,
    species: AtomSpecies,
    site: str = LOWEST_SITE,
    near: Optional[Tuple[float, float, float]] = None,
    max_distance: Optional[float] = None,
    min_depth: float = OPEN_TRAP_DEPTH_THRESHOLD) -> TrapReport:
    """Finds a trap minimum and reports its depth, frequencies and axes.

    The minimum is the lowest interior local minimum (or the one
    closest to the surface, or closest to `near`), refined by Newton
    steps on a Richardson-refined finite-difference Hessian. The depth
    is the escape barrier over the full grid to the rho and z faces or
    the mask, with the l faces as walls. The barrier to the nearest
    other minimum is reported as `site_barrier`.

    Args:
        U (`PotentialGrid`): The potential.

        species (`AtomSpecies`): Supplies the mass.

        site (str): "lowest" or "surface".

        near (tuple of float): Track the minimum closest to this
            (rho, l, z) point instead.

        max_distance (float): With `near`, ignore minima farther away.

        min_depth (float): Depth below which the trap counts as open, J.

    Returns:
        (`TrapReport`): The analysis.

    Raises:
        `OpenTrapError`: No interior minimum with a positive-definite
            Hessian and sufficient depth exists.
    """
    all_minima = local_minima(U)
    minima = _order_candidates(U, all_minima, site, near, max_distance)
    if not minima:
        values = np.where(U.mask, np.inf, U.values)
        lowest = np.unravel_index(int(np.argmin(values)), U.shape)
        raise OpenTrapError(
            "No interior local minimum.",
            _escape_direction(U, U.coordinates(tuple(int(i) for i in lowest))))

    axes = _active_axes(U)
    reason = None
    for candidate in minima:
        try:
            anchor, position, value, hessian = refine_minimum(U, candidate)
        except OpenTrapError as e:
            reason = e
            continue
        curvature = np.linalg.eigvalsh(hessian[np.ix_(axes, axes)])
        if np.any(curvature <= 0):
            reason = OpenTrapError(f"Hessian is not positive definite at {position}.")
            continue

        level, saddle = escape_barrier(
            U.values, U.mask, anchor, U.periodic_l, exit_axes=TRANSVERSE_AXES)
        depth = level - value
        saddle_rho, saddle_l, saddle_z = U.coordinates(saddle)
        if depth < min_depth:
            direction = np.array([saddle_rho, saddle_l, saddle_z]) - position
            norm = np.linalg.norm(direction)
            reason = OpenTrapError(
                f"Depth {depth / K_B * 1e6:.3f} uK is below the open-trap threshold.",
                tuple(float(v) for v in direction / norm) if norm > 0 else None)
            continue
        neighbour_level = site_barrier(U, anchor, all_minima)

        frequencies, vectors = principal_frequencies(hessian, species.mass)
        rho_axis = vectors[:, 0]
        tilt = float(np.arctan2(rho_axis[2], rho_axis[0]))
        if tilt > np.pi / 2:
            tilt -= np.pi
        elif tilt <= -np.pi / 2:
            tilt += np.pi
        return TrapReport(
            center=tuple(float(v) for v in position),
            value=value,
            depth=float(depth),
            saddle=(float(saddle_rho), float(saddle_z)),
            frequencies=tuple(float(f) for f in frequencies),
            principal_axes=tuple(tuple(float(c) for c in vectors[:, k]) for k in range(3)),
            tilt_angle=tilt,
            site_barrier=None if neighbour_level is None else float(neighbour_level - value))
    raise reason
