import json

import numpy as np

from carnot_spheres import jsonio
from carnot_spheres import sampling


def test_floats_round_trip_exactly():
    x = [0.1, 1 / 3, 2.0**-40, 1e300, -7.0]
    back = json.loads(jsonio.dumps({"x": np.array(x)}))["x"]
    assert back == x


def test_special_values():
    assert json.loads(jsonio.dumps({"a": float("inf"), "b": None, "c": True})) == {"a": "inf", "b": None, "c": True}


def test_chunking_is_deterministic():
    sizes = sampling.chunk_sizes(10_000)
    assert sum(sizes) == 10_000 and sizes[0] == sampling.CHUNK
    a = sampling.chunk_rng(3, 1, 2).normal(size=4)
    b = sampling.chunk_rng(3, 1, 2).normal(size=4)
    np.testing.assert_array_equal(a, b)
    r1 = sampling.map_chunks(lambda c, s: (c, s), 10_000, workers=1)
    r2 = sampling.map_chunks(lambda c, s: (c, s), 10_000, workers=3)
    assert r1 == r2


def test_direction_sets():
    d = sampling.sphere_directions(3, 100, seed=0)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)
    f = sampling.fibonacci_sphere(500)
    assert abs(f.mean(axis=0)).max() < 0.01
