"""Binary PPM (P6) pictures of filled Julia sets with rays drawn on top."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import QuadraticMap, fixed_points, trace_external_ray
from .errors import DomainError

INTERIOR = (0, 0, 0)
BOUNDARY = (255, 255, 255)
RAY = (230, 40, 40)
MARK = (40, 200, 255)


@dataclass
class View:
    center: complex = 0j
    half_width: float = 2.2
    width: int = 400
    height: int = 400

    def grid(self) -> np.ndarray:
        hh = self.half_width * self.height / self.width
        xs = np.linspace(self.center.real - self.half_width, self.center.real + self.half_width, self.width)
        ys = np.linspace(self.center.imag + hh, self.center.imag - hh, self.height)
        return xs[None, :] + 1j * ys[:, None]

    @property
    def pixel(self) -> float:
        return 2 * self.half_width / max(self.width - 1, 1)

    def to_pixel(self, z: complex) -> Tuple[float, float]:
        hh = self.half_width * self.height / self.width
        col = (z.real - (self.center.real - self.half_width)) / self.pixel
        row = ((self.center.imag + hh) - z.imag) / (2 * hh / max(self.height - 1, 1))
        return col, row


def escape_shading(c: complex, view: View, max_iter: int = 400, radius: float = 1e3) -> np.ndarray:
    """RGB array: gray levels by escape time, black interior, white near the Julia set.

    The boundary band uses the distance estimate ``|z| log|z| / |dz|`` so a
    Julia set without interior (like the segment for ``c = -2``) still shows.
    """
    z = view.grid()
    dz = np.ones_like(z)
    n_esc = np.full(z.shape, -1, dtype=np.int64)
    dist = np.full(z.shape, np.inf)
    alive = np.ones(z.shape, bool)
    for k in range(max_iter):
        dz[alive] = 2 * z[alive] * dz[alive]
        z[alive] = z[alive] ** 2 + c
        out = alive & (np.abs(z) > radius)
        if out.any():
            az = np.abs(z[out])
            n_esc[out] = k
            dist[out] = az * np.log(az) / np.maximum(np.abs(dz[out]), 1e-300)
            alive &= ~out
        if not alive.any():
            break
    img = np.zeros(z.shape + (3,), dtype=np.uint8)
    esc = n_esc >= 0
    shade = np.zeros(z.shape)
    shade[esc] = 60 + 150 * (1 - np.exp(-n_esc[esc] / 12.0))
    img[esc] = shade[esc, None].astype(np.uint8)
    img[~esc] = INTERIOR
    img[esc & (dist < 0.5 * view.pixel)] = BOUNDARY
    return img


def draw_polyline(img: np.ndarray, view: View, points: Iterable[complex], color=RAY):
    """Rasterize segments by uniform sampling (half a pixel per step)."""
    h, w = img.shape[:2]
    pts = [view.to_pixel(complex(p)) for p in points]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        steps = int(max(abs(x1 - x0), abs(y1 - y0)) * 2) + 1
        if steps > 8 * (w + h):
            continue
        for i in range(steps + 1):
            u = i / steps
            col = int(round(x0 + u * (x1 - x0)))
            row = int(round(y0 + u * (y1 - y0)))
            if 0 <= row < h and 0 <= col < w:
                img[row, col] = color


def mark(img: np.ndarray, view: View, z: complex, color=MARK, size: int = 2):
    col, row = view.to_pixel(z)
    h, w = img.shape[:2]
    r0, c0 = int(round(row)), int(round(col))
    img[max(0, r0 - size):min(h, r0 + size + 1), max(0, c0 - size):min(w, c0 + size + 1)] = color


def write_ppm(path, img: np.ndarray):
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def read_ppm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise DomainError("not a P6 file")
    w, h = int(parts[1]), int(parts[2])
    body = data[len(data) - w * h * 3:]
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


def render_scene(scene: str, c: complex, view: Optional[View] = None,
                 angles: Sequence = (), max_iter: int = 400) -> Tuple[np.ndarray, dict]:
    """Image and a small metadata dict for ``julia``, ``rays`` or ``puzzle``."""
    if scene not in ("julia", "rays", "puzzle"):
        raise DomainError(f"unknown scene {scene!r}")
    view = view or View()
    f = QuadraticMap.standard(c)
    img = escape_shading(complex(c), view, max_iter)
    meta = {"scene": scene, "c": complex(c), "width": view.width, "height": view.height,
            "half_width": view.half_width, "max_iter": max_iter, "rays": []}
    if scene == "puzzle" and not angles:
        angles = (Fraction(1, 3), Fraction(2, 3), Fraction(1, 6), Fraction(5, 6))
    if scene == "rays" and not angles:
        angles = (Fraction(1, 3), Fraction(2, 3))
    for a in angles:
        ray = trace_external_ray(f, a)
        draw_polyline(img, view, ray.vertices)
        meta["rays"].append({"angle": str(ray.angle), "landing": ray.landing_point,
                             "certified": ray.landing_certified})
    if scene in ("rays", "puzzle"):
        alpha = fixed_points(f).alpha
        mark(img, view, alpha)
        meta["alpha"] = alpha
    if scene == "puzzle":
        # equipotential G = 1 as a polyline through Boettcher preimages
        pts = []
        for k in range(0, 361):
            th = 2 * math.pi * k / 360
            pts.append(_equipotential_point(f, math.e, th))
        draw_polyline(img, view, pts, color=(120, 255, 120))
    return img, meta


def _equipotential_point(f: QuadraticMap, rho: float, th: float, depth: int = 8) -> complex:
    """Point with Boettcher coordinate ``rho e^{i th}`` via pullback from far out."""
    c = complex(f.c)
    w = (rho ** (2 ** depth)) * complex(math.cos(th * 2 ** depth), math.sin(th * 2 ** depth))
    z = w
    for j in range(depth, 0, -1):
        target = rho ** (2 ** (j - 1)) * complex(math.cos(th * 2 ** (j - 1)), math.sin(th * 2 ** (j - 1)))
        r = np.sqrt(z - c)
        z = r if abs(r - target) <= abs(-r - target) else -r
    return complex(z)
