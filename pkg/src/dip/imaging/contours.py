from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from dip.geometry import Point2, Rect
from dip.imaging.canny import EIGHT, EdgeMap


@dataclass(frozen=True, eq=False)
class Contour:
    pixels: np.ndarray  # (n, 2) integer (x, y)
    centroid: Point2
    area: int
    bbox: Rect

    def offset(self, dx: int, dy: int) -> "Contour":
        """Same contour expressed in a frame shifted by (dx, dy).

        The centroid is recomputed from the shifted pixels so it matches a
        contour extracted in the shifted frame to the last bit.
        """
        pix = self.pixels + np.array([dx, dy])
        return Contour(
            pix,
            Point2(float(pix[:, 0].mean()), float(pix[:, 1].mean())),
            self.area,
            Rect(self.bbox.x_min + dx, self.bbox.y_min + dy, self.bbox.x_max + dx, self.bbox.y_max + dy),
        )


def contour_sort_key(c: Contour):
    return (-c.area, c.centroid.y, c.centroid.x)


def extract_contours(edges: EdgeMap | np.ndarray, min_area: int = 20) -> list[Contour]:
    """8-connected edge components, largest first.

    Ties on area go to the smaller centroid y, then x.
    """
    mask = edges.data if isinstance(edges, EdgeMap) else np.asarray(edges, dtype=bool)
    labels, n = ndimage.label(mask, structure=EIGHT)
    if n == 0:
        return []
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs]
    order = np.argsort(lab, kind="stable")
    ys, xs, lab = ys[order], xs[order], lab[order]
    bounds = np.searchsorted(lab, np.arange(1, n + 2))
    out = []
    for i in range(n):
        lo, hi = bounds[i], bounds[i + 1]
        area = hi - lo
        if area < min_area:
            continue
        cx, cy = xs[lo:hi], ys[lo:hi]
        out.append(
            Contour(
                pixels=np.stack([cx, cy], axis=1),
                centroid=Point2(float(cx.mean()), float(cy.mean())),
                area=int(area),
                bbox=Rect(int(cx.min()), int(cy.min()), int(cx.max()), int(cy.max())),
            )
        )
    out.sort(key=contour_sort_key)
    return out
