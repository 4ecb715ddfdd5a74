from itertools import permutations

import numpy as np

from fieldscape.critical import (
    CriticalCensus,
    critical_values_from_diagram,
    detect_critical,
    locality_gap_demo,
    write_census_csv,
)
from fieldscape.cubical import ScalarField, build_filtration
from fieldscape.persistence import betti_curve, betti_oracle, compute_persistence

from conftest import random_field


def diagram_of(field):
    return compute_persistence(build_filtration(field))


class TestDetectCritical:
    def test_1x3_census(self):
        census = detect_critical(ScalarField.from_flat(1, 3, [0.0, 2.0, 1.0]))
        assert census.counts == (2, 1, 0)
        assert census.value_index_multiset() == {(0.0, 0): 1, (1.0, 0): 1, (2.0, 1): 1}

    def test_ring_has_one_saddle_one_max(self, ring_field):
        census = detect_critical(ring_field)
        assert census.counts == (1, 1, 1)
        ms = census.value_index_multiset()
        assert ms[(8.0, 1)] == 1 and ms[(10.0, 2)] == 1

    def test_monotone_field_has_unique_minimum(self):
        field = ScalarField(3, 4, np.arange(12, dtype=float).reshape(3, 4))
        census = detect_critical(field)
        n0, n1, n2 = census.counts
        assert n0 == 1
        assert n0 - n1 + n2 == 1

    def test_euler_relation(self):
        rng = np.random.default_rng(21)
        for _ in range(60):
            census = detect_critical(random_field(rng, 8, 8, ties=bool(rng.integers(2))))
            n0, n1, n2 = census.counts
            assert n0 - n1 + n2 == 1

    def test_monkey_saddle_multiplicity(self):
        # center has four lower edge-neighbors, diagonals high: the lower
        # link is four isolated nodes, a multiplicity-3 saddle
        vals = np.array([[9.0, 1.0, 9.0], [2.0, 5.0, 3.0], [9.0, 4.0, 9.0]])
        census = detect_critical(ScalarField(3, 3, vals))
        saddles = [e for e in census.events if e.index == 1]
        assert [(e.row, e.col, e.multiplicity) for e in saddles] == [(1, 1, 3)]

    def test_locality_of_decision(self):
        # events at the center vertex only depend on its 3x3 neighborhood
        rng = np.random.default_rng(22)
        for _ in range(30):
            field = random_field(rng, 7, 7)
            if field.rows < 3 or field.cols < 3:
                continue
            r = int(rng.integers(1, field.rows - 1))
            c = int(rng.integers(1, field.cols - 1))

            def events_at(f):
                return sorted(
                    (e.index, e.multiplicity)
                    for e in detect_critical(f).events
                    if (e.row, e.col) == (r, c)
                )

            before = events_at(field)
            perturbed = field.values.copy()
            far = np.ones_like(perturbed, dtype=bool)
            far[max(0, r - 1) : r + 2, max(0, c - 1) : c + 2] = False
            perturbed[far] = rng.standard_normal(int(far.sum())) * 100.0
            assert events_at(ScalarField(field.rows, field.cols, perturbed)) == before


class TestCensusFromDiagram:
    def test_1x3_example(self):
        census = critical_values_from_diagram(diagram_of(ScalarField.from_flat(1, 3, [0.0, 2.0, 1.0])))
        assert census.value_index_multiset() == {(0.0, 0): 1, (1.0, 0): 1, (2.0, 1): 1}

    def test_empty_diagram_keeps_essential_minimum(self):
        xs = np.arange(3, dtype=float)
        census = critical_values_from_diagram(diagram_of(ScalarField(3, 3, xs[:, None] ** 2 + xs[None, :] ** 2)))
        assert census.value_index_multiset() == {(0.0, 0): 1}

    def test_ring_census(self, ring_field):
        census = critical_values_from_diagram(diagram_of(ring_field))
        ms = census.value_index_multiset()
        assert ms[(8.0, 1)] == 1 and ms[(10.0, 2)] == 1 and ms[(1.0, 0)] == 1

    def test_explicit_essential_min_override(self, ring_field):
        census = critical_values_from_diagram(diagram_of(ring_field), essential_min=-7.0)
        assert census.value_index_multiset()[(-7.0, 0)] == 1


def test_census_agreement_randomized():
    """The diagram determines the (value, index) census exactly."""
    rng = np.random.default_rng(23)
    for _ in range(150):
        field = random_field(rng, 8, 8, ties=bool(rng.integers(2)))
        assert detect_critical(field) == critical_values_from_diagram(diagram_of(field))


def _census_key(field: ScalarField):
    return frozenset(detect_critical(field).value_index_multiset().items())


def _diagram_key(field: ScalarField):
    d = diagram_of(field)
    return frozenset((p.degree, p.birth, p.death) for p in d.pairs)


class TestLocalityGap:
    def test_embedded_witness(self):
        a, b = locality_gap_demo()
        assert detect_critical(a) == detect_critical(b)
        assert _diagram_key(a) != _diagram_key(b)

    def test_witness_found_by_exhaustive_search(self):
        """All 1x5 permutations: some census class holds two diagram classes."""
        by_census: dict = {}
        for perm in permutations(range(5)):
            field = ScalarField.from_flat(1, 5, [float(x) for x in perm])
            by_census.setdefault(_census_key(field), set()).add(_diagram_key(field))
        split = {census for census, diagrams in by_census.items() if len(diagrams) > 1}
        assert split, "no witness pair among 1x5 permutations"
        a, b = locality_gap_demo()
        assert _census_key(a) == _census_key(b)
        assert _census_key(a) in split
        assert _diagram_key(a) != _diagram_key(b)
        assert {_diagram_key(a), _diagram_key(b)} <= by_census[_census_key(a)]

    def test_witness_fields_pass_oracle_equivalence(self):
        for field in locality_gap_demo():
            filt = build_filtration(field)
            diagram = compute_persistence(filt)
            for a in np.unique(filt.values):
                assert betti_curve(diagram, float(a)) == betti_oracle(filt, float(a))


def test_census_csv(tmp_path, ring_field):
    census = detect_critical(ring_field)
    path = tmp_path / "census.csv"
    write_census_csv(census, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "row,col,value,index,multiplicity"
    assert len(lines) == 1 + len(census.events)


def test_detect_critical_linear_scaling():
    """Local detection is O(vertices): time per vertex stays flat."""
    import time

    rng = np.random.default_rng(24)
    small = ScalarField(64, 64, rng.standard_normal((64, 64)))
    big = ScalarField(256, 256, rng.standard_normal((256, 256)))

    def best_of_three(field):
        times = []
        for _ in range(3):
            t0 = time.perf_counter()
            detect_critical(field)
            times.append(time.perf_counter() - t0)
        return min(times)

    t_small = best_of_three(small)
    t_big = best_of_three(big)
    vertex_ratio = (256 * 256) / (64 * 64)  # 16x
    # generous slack over linear; fails only on clearly superlinear behavior
    assert t_big < t_small * vertex_ratio * 8
