"""Deliberately naive reference implementations used as test oracles.

Everything here is plain Python over small inputs: per-satellite loops,
closed-form local frames from latitude/longitude and Floyd-Warshall
reachability. Nothing is shared with the package beyond constants.
"""
import itertools
import math

from qsatnet.constants import R_EARTH


def ecef(lat, lon, r=R_EARTH):
    return (r * math.cos(lat) * math.cos(lon), r * math.cos(lat) * math.sin(lon), r * math.sin(lat))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def _norm(a):
    return math.sqrt(_dot(a, a))


def local_frame(lat, lon):
    east = (-math.sin(lon), math.cos(lon), 0.0)
    north = (-math.sin(lat) * math.cos(lon), -math.sin(lat) * math.sin(lon), math.cos(lat))
    up = (math.cos(lat) * math.cos(lon), math.cos(lat) * math.sin(lon), math.sin(lat))
    return east, north, up


def zenith_and_range(st_latlon, sat):
    lat, lon = st_latlon
    g = ecef(lat, lon)
    d = _sub(sat, g)
    rng = _norm(d)
    up = local_frame(lat, lon)[2]
    return math.acos(max(-1.0, min(1.0, _dot(d, up) / rng))), rng


def efficiency(rng, zen, a=0.5, w0=0.10, lam=810e-9, eta0=0.8):
    zr = math.pi * w0 * w0 / lam
    w = w0 * math.sqrt(1 + (rng / zr) ** 2)
    return (1 - math.exp(-2 * a * a / (w * w))) * eta0 ** (1 / math.cos(zen))


def azimuth(from_latlon, to_latlon):
    e, n, _ = local_frame(*from_latlon)
    v = _sub(ecef(*to_latlon), ecef(*from_latlon))
    return math.atan2(_dot(v, e), _dot(v, n)) % (2 * math.pi)


def epoch_edges(stations, sats, policy, terminals, z_max, source_rate=1e8, floor=1.0):
    """Edge dict for one epoch; ``stations`` are (lat, lon) radians, ``sats`` ECEF tuples."""
    edges = {}
    for sat in sats:
        vis = []
        for gid, s in enumerate(stations):
            z, r = zenith_and_range(s, sat)
            if z <= z_max:
                vis.append((r, gid, z))
        if len(vis) < 2:
            continue
        vis.sort()
        chosen = vis[:terminals]
        eta = {gid: efficiency(r, z) for r, gid, z in chosen}
        ids = [gid for _, gid, _ in chosen]
        if policy == "BPC":
            pairs = [(ids[0], ids[1])]
        else:
            hub, rest = ids[0], ids[1:]
            pairs = [(hub, m) for m in rest]
            ring = sorted(rest, key=lambda m: (azimuth(stations[hub], stations[m]), m))
            if len(ring) == 2:
                pairs.append((ring[0], ring[1]))
            elif len(ring) >= 3:
                pairs += [(ring[k], ring[(k + 1) % len(ring)]) for k in range(len(ring))]
        for a, b in pairs:
            rate = source_rate * eta[a] * eta[b]
            if rate < floor:
                continue
            key = (min(a, b), max(a, b))
            edges[key] = max(edges.get(key, 0.0), rate)
    return edges


def reachability(n, edges):
    """Transitive closure by Floyd-Warshall on a boolean matrix."""
    reach = [[i == j for j in range(n)] for i in range(n)]
    for i, j in edges:
        reach[i][j] = reach[j][i] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return reach


def lcc_fraction(n, edges):
    reach = reachability(n, edges)
    return max(sum(row) for row in reach) / n


def city_fraction(n, edges, city_station):
    reach = reachability(n, edges)
    pairs = list(itertools.combinations(city_station, 2))
    if not pairs:
        return 1.0
    return sum(reach[a][b] for a, b in pairs) / len(pairs)
