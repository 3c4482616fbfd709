import random

import pytest

from coopkitchen.assets import load_bundled_map
from coopkitchen.world import GridMap, Kitchen, load_map

MINI_MAP = """\
name=mini
#O#B#
#0.1#
#2.3#
#P.W#
#####
"""

OPEN_MAP = """\
name=open9
####B####
#0.....1#
O.......#
#.......#
#2.....3#
####PW###
"""

CORRIDOR_MAP = """\
name=corridor
#O######W#
#0.1.2.3.#
##########
"""


@pytest.fixture(scope="session")
def mini_kitchen() -> Kitchen:
    return Kitchen(load_map(MINI_MAP))


@pytest.fixture(scope="session")
def open_kitchen() -> Kitchen:
    return Kitchen(load_map(OPEN_MAP))


@pytest.fixture(scope="session")
def map_a() -> GridMap:
    return load_bundled_map("map_a")


@pytest.fixture(scope="session")
def kitchen_a(map_a) -> Kitchen:
    return Kitchen(map_a)


def random_grid(rng: random.Random, width: int, height: int, density: float):
    """A random open-bordered map plus its walkable set, for path oracles."""
    rows = []
    for y in range(height):
        row = []
        for x in range(width):
            if x in (0, width - 1) or y in (0, height - 1):
                row.append("#")
            elif rng.random() < density:
                row.append("#")
            else:
                row.append(".")
        rows.append(row)
    walkable = {
        (x, y)
        for y in range(height)
        for x in range(width)
        if rows[y][x] == "."
    }
    return rows, walkable
