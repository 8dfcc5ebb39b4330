"""Exact specular geometry: mirror-image enumeration and SBR refinement.

Both functions produce canonical paths: reflection points are the exact
mirror-chain solutions, and each signature entry is rewritten to the id of
the triangle actually containing the exact point (lowest id wins on shared
edges), so SBR and image-method output agree signature for signature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bvh import BvhIndex
from ..geometry import az_el_from_direction, mirror_point, point_in_triangle
from ..scene import SceneSnapshot
from .path import (REFLECTION, TRANSMISSION, Interaction, PropagationPath, Signature)

IM_FACET_GUARD = 200
CONTAIN_TOL = 1e-7


class ImageMethodError(ValueError):
    """Scene too large for exhaustive image enumeration."""


@dataclass
class Facet:
    """Maximal coplanar same-material group of triangles."""

    facet_id: int
    triangle_ids: np.ndarray
    point: np.ndarray          # plane anchor
    normal: np.ndarray         # unit
    material_id: int


def build_facets(snap: SceneSnapshot) -> list[Facet]:
    groups = snap.facet_ids()
    facets = []
    for g in range(int(groups.max()) + 1 if len(groups) else 0):
        ids = np.nonzero(groups == g)[0]
        t0 = int(ids[0])
        facets.append(Facet(
            facet_id=g, triangle_ids=ids, point=snap.v0[t0].copy(),
            normal=snap.normals[t0].copy(), material_id=int(snap.material_ids[t0])))
    return facets


def _containing_triangle(snap: SceneSnapshot, facet: Facet, p: np.ndarray) -> int | None:
    best = None
    for t in facet.triangle_ids:
        if point_in_triangle(p, snap.v0[t], snap.v1[t], snap.v2[t], tol=CONTAIN_TOL):
            if best is None or t < best:
                best = int(t)
    return best


def _segments_clear(bvh: BvhIndex, nodes: list[np.ndarray]) -> bool:
    for a, b in zip(nodes, nodes[1:]):
        if bvh.occluded(a, b):
            return False
    return True


def _finish_path(nodes: list[np.ndarray], interactions: list[Interaction]) -> PropagationPath:
    length = float(sum(np.linalg.norm(b - a) for a, b in zip(nodes, nodes[1:])))
    d_out = (nodes[1] - nodes[0])
    d_out = d_out / np.linalg.norm(d_out)
    d_in = (nodes[-1] - nodes[-2])
    d_in = d_in / np.linalg.norm(d_in)
    return PropagationPath(
        interactions=interactions, path_length=length,
        aod=az_el_from_direction(d_out), aoa=az_el_from_direction(-d_in),
        tx_point=nodes[0], rx_point=nodes[-1])


def _solve_mirror_chain(tx: np.ndarray, rx: np.ndarray,
                        refl_facets: list[Facet]) -> list[np.ndarray] | None:
    """Exact reflection points for an ordered facet chain, or None if invalid."""
    images = [tx]
    for f in refl_facets:
        images.append(mirror_point(images[-1], f.point, f.normal))
    points: list[np.ndarray] = []
    target = rx
    for k in range(len(refl_facets) - 1, -1, -1):
        f = refl_facets[k]
        img = images[k + 1]
        seg = img - target
        denom = np.dot(seg, f.normal)
        if abs(denom) < 1e-12:
            return None
        t = np.dot(f.point - target, f.normal) / denom
        if not 1e-9 < t < 1.0 - 1e-9:
            return None
        p = target + t * seg
        points.append(p)
        target = p
    points.reverse()
    return points


def _refine_from_facets(snap: SceneSnapshot, bvh: BvhIndex, tx: np.ndarray, rx: np.ndarray,
                        chain: list[tuple[str, Facet]]) -> PropagationPath | None:
    """Exactify a mixed reflection/transmission facet chain.

    Reflection points come from the mirror chain; transmission points are
    the straight-segment crossings of their planes, in signature order.
    """
    refl = [f for kind, f in chain if kind == REFLECTION]
    refl_points = _solve_mirror_chain(tx, rx, refl)
    if refl_points is None:
        if refl:
            return None
        refl_points = []

    # anchor nodes: tx, reflection points, rx; transmissions subdivide spans
    anchors = [tx] + refl_points + [rx]
    nodes: list[np.ndarray] = [tx]
    interactions: list[Interaction] = []
    span = 0
    prev_t = 0.0
    for kind, f in chain:
        if kind == REFLECTION:
            span += 1
            prev_t = 0.0
            p = refl_points[span - 1]
            tri = _containing_triangle(snap, f, p)
            if tri is None:
                return None
            nodes.append(p)
            interactions.append(Interaction(REFLECTION, p, tri, f.material_id))
            continue
        a, b = anchors[span], anchors[span + 1]
        seg = b - a
        denom = np.dot(seg, f.normal)
        if abs(denom) < 1e-12:
            return None
        t = np.dot(f.point - a, f.normal) / denom
        if not prev_t + 1e-9 < t < 1.0 - 1e-9:
            return None
        prev_t = t
        p = a + t * seg
        tri = _containing_triangle(snap, f, p)
        if tri is None:
            return None
        nodes.append(p)
        interactions.append(Interaction(TRANSMISSION, p, tri, f.material_id))
    nodes.append(rx)
    if not _segments_clear(bvh, nodes):
        return None
    return _finish_path(nodes, interactions)


def refine_specular(signature: Signature, snap: SceneSnapshot, bvh: BvhIndex,
                    tx: np.ndarray, rx: np.ndarray,
                    facets: list[Facet] | None = None) -> PropagationPath | None:
    """Exact path for a reflection/transmission signature, or None when the
    refined geometry leaves its triangles or a segment is blocked."""
    if any(kind not in (REFLECTION, TRANSMISSION) for kind, _ in signature):
        raise ValueError("refine_specular handles only R/T signatures")
    if facets is None:
        facets = build_facets(snap)
    groups = snap.facet_ids()
    chain = []
    for kind, tri in signature:
        chain.append((kind, facets[int(groups[tri])]))
    if not chain:
        if bvh.occluded(tx, rx):
            return None
        return _finish_path([tx, rx], [])
    return _refine_from_facets(snap, bvh, tx, rx, chain)


def enumerate_images(snap: SceneSnapshot, bvh: BvhIndex, tx: np.ndarray, rx: np.ndarray,
                     max_order: int = 2, include_los: bool = True,
                     facets: list[Facet] | None = None) -> list[PropagationPath]:
    """Exhaustive image-tree enumeration of specular reflection paths.

    Exact and complete up to max_order (<= 3); guarded by facet count since
    the tree is exponential. Used both as the offline high-accuracy option
    and as the oracle the SBR output is checked against.
    """
    if max_order > 3:
        raise ImageMethodError("image enumeration supports max_order <= 3")
    if facets is None:
        facets = build_facets(snap)
    if len(facets) > IM_FACET_GUARD:
        raise ImageMethodError(
            f"scene too large for IM: {len(facets)} facets > {IM_FACET_GUARD}")
    paths: list[PropagationPath] = []
    if include_los:
        p = refine_specular((), snap, bvh, tx, rx, facets)
        if p is not None:
            paths.append(p)

    chains: list[tuple[list[Facet], np.ndarray]] = [([], tx)]
    for _ in range(max_order):
        new_chains = []
        for chain, image in chains:
            for f in facets:
                if chain and f.facet_id == chain[-1].facet_id:
                    continue
                # degenerate: source image lying on the mirror plane
                if abs(np.dot(image - f.point, f.normal)) < 1e-12:
                    continue
                new_chains.append((chain + [f], mirror_point(image, f.point, f.normal)))
        for chain, _ in new_chains:
            path = _refine_from_facets(snap, bvh, tx, rx,
                                       [(REFLECTION, f) for f in chain])
            if path is not None:
                paths.append(path)
        chains = new_chains
    paths.sort(key=lambda p: (p.path_length, p.signature))
    return paths
