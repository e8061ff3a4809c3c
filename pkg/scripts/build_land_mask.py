"""Regenerate the bundled 0.5 deg land raster from the ``global-land-mask`` package.

A cell is marked as land when at least 30% of a 5x5 sub-sample of points
inside it is land. Requires ``pip install global-land-mask`` (not a runtime
dependency of qsatnet).

    python scripts/build_land_mask.py src/qsatnet/data/land_mask_0p5.txt.gz
"""
import argparse

import numpy as np
from global_land_mask import globe

from qsatnet.groundgrid import LandMask


def build(resolution=0.5, sub=5, min_fraction=0.3):
    n_lat, n_lon = round(180 / resolution), round(360 / resolution)
    frac = (np.arange(sub) + 0.5) / sub
    lat_c = -90.0 + (np.arange(n_lat)[:, None] + frac[None, :]) * resolution
    lon_c = -180.0 + (np.arange(n_lon)[:, None] + frac[None, :]) * resolution
    lat_s = np.clip(lat_c.reshape(-1), -89.999, 89.999)
    lon_s = np.clip(lon_c.reshape(-1), -179.999, 179.999)
    la, lo = np.meshgrid(lat_s, lon_s, indexing="ij")
    land = globe.is_land(la, lo).reshape(n_lat, sub, n_lon, sub)
    return LandMask(resolution, land.mean(axis=(1, 3)) >= min_fraction)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out")
    ap.add_argument("--resolution", type=float, default=0.5)
    args = ap.parse_args()
    mask = build(args.resolution)
    mask.save(args.out)
    print(f"wrote {args.out}: {mask.grid.mean():.3f} land fraction")


if __name__ == "__main__":
    main()
