"""Deterministic software rasterizer: mesh sequences to grayscale video.

Pinhole projection, z-buffered triangle fill, Lambert shading with one
directional light, checkerboard or flat texture over rest UV, and a
procedural background. Conventions (normative for the oracle tests):
pixel centers sit at (x + 0.5, y + 0.5) with the origin at the top-left;
image y runs downward; depth is camera-space z interpolated
perspective-correctly (linear in 1/z). Face normals are oriented toward
the camera, so cloth is shaded two-sided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vvol import VideoVolume

__all__ = [
    "CameraParams",
    "RenderConfig",
    "place_camera",
    "sample_camera",
    "rasterize",
    "render_sequence",
    "resize_crop",
    "default_flag_camera",
]

_NEAR_PLANE = 0.05   # m; triangles reaching this close (or behind) are culled
_MIN_AZIMUTH = 15.0  # deg floor between camera axis and wind, flag scenes


@dataclass(frozen=True)
class CameraParams:
    """Camera on a circle around the cloth, aimed at its centroid."""

    height: float            # m above the ground plane
    radius: float            # m horizontal distance to the look-at axis
    azimuth_deg: float       # deg between camera axis and wind direction
    look_at: tuple           # 3-D target point, m
    position: tuple          # 3-D camera position, m
    vfov_deg: float = 30.0
    height_px: int = 64
    width_px: int = 64

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("camera radius must be positive")
        if self.height_px < 32 or self.width_px < 32:
            raise ValueError("resolution must be at least 32x32")
        if not 0 < self.vfov_deg < 180:
            raise ValueError("vertical field of view must be in (0, 180)")

    @property
    def position_vec(self) -> np.ndarray:
        return np.asarray(self.position, dtype=np.float64)

    @property
    def look_at_vec(self) -> np.ndarray:
        return np.asarray(self.look_at, dtype=np.float64)


@dataclass(frozen=True)
class RenderConfig:
    """Shading, texture and background of the minimal rasterizer."""

    light_dir: tuple = (0.3, -0.5, 0.8)
    ambient: float = 0.35
    diffuse: float = 0.55
    background: str = "gradient"     # "uniform" | "gradient"
    background_level: float = 0.5
    background_offset: float = 0.0   # per-render-example variation
    background_slope: float = -0.25  # gradient: level change top to bottom
    texture: str = "checker"         # "flat" | "checker"
    checker_size: float = 0.25       # m in rest UV
    checker_dark: float = 0.55       # multiplier on the dark squares

    def __post_init__(self):
        if not 0 <= self.ambient <= 1 or not 0 <= self.diffuse <= 1:
            raise ValueError("ambient and diffuse must lie in [0, 1]")
        if self.ambient + self.diffuse > 1 + 1e-12:
            raise ValueError("ambient + diffuse must not exceed 1")
        if self.background not in ("uniform", "gradient"):
            raise ValueError(f"unknown background {self.background!r}")
        if self.texture not in ("flat", "checker"):
            raise ValueError(f"unknown texture {self.texture!r}")
        light = np.asarray(self.light_dir, dtype=np.float64)
        norm = np.linalg.norm(light)
        if norm < 1e-12:
            raise ValueError("light direction must be nonzero")
        object.__setattr__(self, "light_dir", tuple(light / norm))

    @property
    def light_vec(self) -> np.ndarray:
        return np.asarray(self.light_dir, dtype=np.float64)


def place_camera(height: float, radius: float, azimuth_deg: float,
                 scene: str, wind_dir, look_at,
                 vfov_deg: float = 30.0, resolution=(64, 64)) -> CameraParams:
    """Position a camera on the circle of given radius/height around the cloth.

    ``azimuth_deg`` is the horizontal angle between the camera axis and
    the wind direction; flag scenes require at least 15 degrees so the
    cloth surface stays visible.
    """
    if scene == "flag" and abs(azimuth_deg) < _MIN_AZIMUTH - 1e-9:
        raise ValueError(
            f"flag cameras need |azimuth| >= {_MIN_AZIMUTH} deg, got {azimuth_deg}")
    wind = np.asarray(wind_dir, dtype=np.float64)
    look_at = np.asarray(look_at, dtype=np.float64)
    bearing = math.atan2(wind[1], wind[0]) + math.radians(azimuth_deg)
    axis = np.array([math.cos(bearing), math.sin(bearing), 0.0])
    position = look_at - radius * axis
    position[2] = height
    return CameraParams(height=height, radius=radius, azimuth_deg=azimuth_deg,
                        look_at=tuple(look_at), position=tuple(position),
                        vfov_deg=vfov_deg,
                        height_px=resolution[0], width_px=resolution[1])


def sample_camera(rng: np.random.Generator, scene: str, wind_dir, look_at,
                  vfov_deg: float = 30.0, resolution=(64, 64)) -> CameraParams:
    """Draw a camera from the per-scene placement ranges.

    Flags: height U(0.2, 3), radius U(4, 6), azimuth 15 deg floor plus a
    U(-15, 15) offset away from it (both sides of the wind axis).
    Hanging cloth: height U(0.5, 2), radius U(1, 2.5), azimuth U(-5, 5).
    """
    if scene == "flag":
        height = rng.uniform(0.2, 3.0)
        radius = rng.uniform(4.0, 6.0)
        off = rng.uniform(-15.0, 15.0)
        azimuth = math.copysign(_MIN_AZIMUTH + abs(off), off if off != 0 else 1.0)
    else:
        height = rng.uniform(0.5, 2.0)
        radius = rng.uniform(1.0, 2.5)
        azimuth = rng.uniform(-5.0, 5.0)
    return place_camera(height, radius, azimuth, scene, wind_dir, look_at,
                        vfov_deg=vfov_deg, resolution=resolution)


def default_flag_camera(look_at, resolution=(64, 64)) -> CameraParams:
    return place_camera(height=1.6, radius=4.5, azimuth_deg=20.0, scene="flag",
                        wind_dir=(1.0, 0.0, 0.0), look_at=look_at,
                        resolution=resolution)


def _camera_frame(camera: CameraParams):
    position = camera.position_vec
    forward = camera.look_at_vec - position
    dist = np.linalg.norm(forward)
    if dist < 1e-12:
        raise ValueError("camera coincides with its look-at point")
    forward = forward / dist
    right = np.cross(forward, np.array([0.0, 0.0, 1.0]))
    norm = np.linalg.norm(right)
    if norm < 1e-9:
        raise ValueError("camera axis too close to vertical")
    right /= norm
    down = np.cross(forward, right)
    return position, right, down, forward


def _project(positions: np.ndarray, camera: CameraParams):
    """World points to (x_px, y_px, camera z)."""
    pos, right, down, forward = _camera_frame(camera)
    rel = positions - pos
    zc = rel @ forward
    focal = (camera.height_px / 2.0) / math.tan(math.radians(camera.vfov_deg) / 2.0)
    safe = np.where(np.abs(zc) < 1e-12, 1.0, zc)
    x = camera.width_px / 2.0 + focal * (rel @ right) / safe
    y = camera.height_px / 2.0 + focal * (rel @ down) / safe
    return x, y, zc


def _background(camera: CameraParams, config: RenderConfig) -> np.ndarray:
    h, w = camera.height_px, camera.width_px
    base = config.background_level + config.background_offset
    if config.background == "uniform":
        return np.full((h, w), base)
    rows = np.arange(h) / max(h - 1, 1) - 0.5
    return np.repeat((base + config.background_slope * rows)[:, None], w, axis=1)


def rasterize(positions: np.ndarray, triangles: np.ndarray, rest_uv: np.ndarray,
              camera: CameraParams, config: RenderConfig) -> np.ndarray:
    """Render one frame to an (H, W) image with values in [0, 1]."""
    h, w = camera.height_px, camera.width_px
    img = _background(camera, config)
    zbuf = np.full((h, w), np.inf)
    px, py, pz = _project(positions, camera)
    cam_pos = camera.position_vec
    light = config.light_vec
    checker = config.texture == "checker"

    for tri in triangles:
        i0, i1, i2 = tri
        z0, z1, z2 = pz[i0], pz[i1], pz[i2]
        if z0 <= _NEAR_PLANE or z1 <= _NEAR_PLANE or z2 <= _NEAR_PLANE:
            continue  # wholly or partially behind the near plane: culled
        x0, y0 = px[i0], py[i0]
        x1, y1 = px[i1], py[i1]
        x2, y2 = px[i2], py[i2]
        area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if abs(area) < 1e-12:
            continue
        xmin = max(int(math.ceil(min(x0, x1, x2) - 0.5)), 0)
        xmax = min(int(math.floor(max(x0, x1, x2) - 0.5)), w - 1)
        ymin = max(int(math.ceil(min(y0, y1, y2) - 0.5)), 0)
        ymax = min(int(math.floor(max(y0, y1, y2) - 0.5)), h - 1)
        if xmin > xmax or ymin > ymax:
            continue
        cx = np.arange(xmin, xmax + 1) + 0.5
        cy = (np.arange(ymin, ymax + 1) + 0.5)[:, None]
        w0 = (x1 - cx) * (y2 - cy) - (x2 - cx) * (y1 - cy)
        w1 = (x2 - cx) * (y0 - cy) - (x0 - cx) * (y2 - cy)
        w2 = (x0 - cx) * (y1 - cy) - (x1 - cx) * (y0 - cy)
        l0, l1, l2 = w0 / area, w1 / area, w2 / area
        inside = (l0 >= 0) & (l1 >= 0) & (l2 >= 0)
        if not inside.any():
            continue
        zinv = l0 / z0 + l1 / z1 + l2 / z2
        depth = 1.0 / np.where(zinv > 1e-12, zinv, 1e-12)
        tile = zbuf[ymin:ymax + 1, xmin:xmax + 1]
        closer = inside & (depth < tile)
        if not closer.any():
            continue

        a, b, c = positions[i0], positions[i1], positions[i2]
        normal = np.cross(b - a, c - a)
        nlen = np.linalg.norm(normal)
        if nlen < 1e-15:
            continue
        normal /= nlen
        centroid = (a + b + c) / 3.0
        if normal @ (cam_pos - centroid) < 0:
            normal = -normal  # two-sided cloth: face the camera
        shade = config.ambient + config.diffuse * max(0.0, float(normal @ light))

        if checker:
            uv0, uv1, uv2 = rest_uv[i0], rest_uv[i1], rest_uv[i2]
            uu = l0 * uv0[0] + l1 * uv1[0] + l2 * uv2[0]
            vv = l0 * uv0[1] + l1 * uv1[1] + l2 * uv2[1]
            parity = (np.floor(uu / config.checker_size)
                      + np.floor(vv / config.checker_size)) % 2
            value = shade * np.where(parity == 0, 1.0, config.checker_dark)
        else:
            value = shade

        img[ymin:ymax + 1, xmin:xmax + 1][closer] = \
            np.broadcast_to(value, closer.shape)[closer]
        tile[closer] = depth[closer]
    return np.clip(img, 0.0, 1.0)


def render_sequence(meshes: np.ndarray, triangles: np.ndarray,
                    rest_uv: np.ndarray, camera: CameraParams,
                    config: RenderConfig) -> VideoVolume:
    """Rasterize every frame of a mesh sequence into a (1, N_t, H, W) volume."""
    if len(meshes) == 0:
        raise ValueError("empty mesh sequence")
    frames = np.empty((len(meshes), camera.height_px, camera.width_px),
                      dtype=np.float32)
    for t, frame in enumerate(meshes):
        try:
            frames[t] = rasterize(frame, triangles, rest_uv, camera, config)
        except Exception as err:
            raise RuntimeError(f"rasterization failed at frame {t}: {err}") from err
    return VideoVolume(data=frames[None])


def resize_crop(volume: VideoVolume, out_h: int, out_w: int) -> VideoVolume:
    """Center-crop to a square, then bilinear-resize each frame.

    Source coordinates follow ``src = (dst + 0.5) * scale - 0.5`` clamped
    to the frame, which keeps constants constant and is the identity when
    the sizes match. Upscaling is rejected.
    """
    c, n_t, h, w = volume.data.shape
    side = min(h, w)
    if out_h > side or out_w > side:
        raise ValueError(f"cannot upscale {side}x{side} crop to {out_h}x{out_w}")
    top, left = (h - side) // 2, (w - side) // 2
    cropped = volume.data[:, :, top:top + side, left:left + side].astype(np.float64)

    def axis_coords(out_n):
        src = (np.arange(out_n) + 0.5) * (side / out_n) - 0.5
        src = np.clip(src, 0.0, side - 1.0)
        lo = np.floor(src).astype(np.intp)
        hi = np.minimum(lo + 1, side - 1)
        return lo, hi, src - lo

    y0, y1, fy = axis_coords(out_h)
    x0, x1, fx = axis_coords(out_w)
    fy = fy[:, None]
    top_row = cropped[..., y0, :]
    bot_row = cropped[..., y1, :]
    rows = top_row * (1 - fy) + bot_row * fy
    out = rows[..., x0] * (1 - fx) + rows[..., x1] * fx
    return VideoVolume(data=out.astype(np.float32))
