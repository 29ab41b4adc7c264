import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from situcbr.taxonomy import (
    Taxonomy,
    TaxonomyError,
    UnknownConceptError,
    concept_similarity,
    depth,
    lcs,
    load_taxonomy,
)

import oracles


def doc(nodes, dimension="location"):
    return json.dumps({"dimension": dimension, "nodes": nodes})


def node(id, parent=None, label=None):
    return {"id": id, "label": label or id, "parent": parent}


trees = st.lists(st.integers(min_value=0, max_value=10_000), min_size=0, max_size=49)


def tree_from(encoding):
    parents = oracles.parents_from_encoding(encoding)
    tax = Taxonomy.from_nodes("social", [node(k, v) for k, v in parents.items()])
    return parents, tax


class TestLoad:
    def test_location_fixture(self, taxonomies):
        loc = taxonomies.location
        assert len(loc) == 6
        assert loc.root == "france"
        assert loc.children("ile_de_france") == ["evry", "paris"]

    def test_single_node(self):
        t = load_taxonomy(doc([node("root")]))
        assert len(t) == 1
        assert depth(t, "root") == 1

    def test_missing_parent_key_means_root(self):
        t = load_taxonomy(doc([{"id": "r", "label": "R"}, node("a", "r")]))
        assert t.root == "r"

    def test_dangling_parent_names_node(self):
        with pytest.raises(TaxonomyError) as err:
            load_taxonomy(doc([node("france"), node("paris", "atlantis")]))
        assert err.value.node_id == "paris"
        assert "atlantis" in str(err.value)

    def test_duplicate_id(self):
        with pytest.raises(TaxonomyError) as err:
            load_taxonomy(doc([node("a"), node("b", "a"), node("b", "a")]))
        assert err.value.node_id == "b"

    def test_multiple_roots(self):
        with pytest.raises(TaxonomyError, match="several roots"):
            load_taxonomy(doc([node("a"), node("b")]))

    def test_no_root(self):
        with pytest.raises(TaxonomyError, match="no root"):
            load_taxonomy(doc([node("a", "b"), node("b", "a")]))

    def test_cycle_beside_root(self):
        with pytest.raises(TaxonomyError, match="cycle") as err:
            load_taxonomy(doc([node("r"), node("a", "b"), node("b", "a"), node("c", "a")]))
        assert err.value.node_id in {"a", "b"}

    def test_self_loop(self):
        with pytest.raises(TaxonomyError, match="cycle") as err:
            load_taxonomy(doc([node("r"), node("a", "a")]))
        assert err.value.node_id == "a"

    def test_list_parent_rejected(self):
        with pytest.raises(TaxonomyError, match="trees") as err:
            load_taxonomy(doc([node("r"), node("x"), {"id": "a", "label": "A", "parent": ["r", "x"]}]))
        assert err.value.node_id == "a"

    @pytest.mark.parametrize("bad", ["Paris", "ile-de-france", "", "a b"])
    def test_bad_ids(self, bad):
        with pytest.raises(TaxonomyError, match="invalid concept id"):
            load_taxonomy(doc([node("r"), {"id": bad, "label": "x", "parent": "r"}]))

    @pytest.mark.parametrize("text", ["{not json", "[]", json.dumps({"dimension": "weather", "nodes": []}),
                                      json.dumps({"dimension": "time", "nodes": {}})])
    def test_parse_failures(self, text):
        with pytest.raises(TaxonomyError):
            load_taxonomy(text)

    def test_to_dict_round_trip(self, taxonomies):
        for t in taxonomies:
            assert load_taxonomy(t.to_dict()) == t


class TestDepthAndLcs:
    def test_fixture_depths(self, taxonomies):
        loc = taxonomies.location
        assert depth(loc, "ile_de_france") == 2
        assert depth(loc, "paris") == 3
        assert depth(loc, "evry") == 3
        assert depth(loc, "france") == 1

    def test_lcs(self, taxonomies):
        loc = taxonomies.location
        assert lcs(loc, "paris", "evry") == "ile_de_france"
        assert lcs(loc, "paris", "lille") == "france"
        assert lcs(loc, "lille", "lille") == "lille"
        assert lcs(loc, "paris", "ile_de_france") == "ile_de_france"

    def test_unknown_concept(self, taxonomies):
        with pytest.raises(UnknownConceptError) as err:
            depth(taxonomies.location, "atlantis")
        assert err.value.node_id == "atlantis"
        with pytest.raises(KeyError):
            lcs(taxonomies.location, "paris", "atlantis")

    def test_ancestors(self, taxonomies):
        assert taxonomies.location.ancestors("evry") == ["evry", "ile_de_france", "france"]


class TestSimilarity:
    def test_paris_evry(self, taxonomies):
        loc = taxonomies.location
        assert concept_similarity(loc, "paris", "evry") == Fraction(4, 6)
        assert concept_similarity(loc, "paris", "lille") == Fraction(1, 3)
        assert concept_similarity(loc, "paris", "paris") == 1

    def test_manager_vs_champagne_client(self, taxonomies):
        assert concept_similarity(taxonomies.social, "champagne_client", "manager") == Fraction(2, 6)

    def test_exact_type(self, taxonomies):
        assert isinstance(concept_similarity(taxonomies.time, "workday", "holiday"), Fraction)


class TestProperties:
    @settings(max_examples=150, deadline=None)
    @given(trees, st.data())
    def test_range_symmetry_identity(self, encoding, data):
        parents, tax = tree_from(encoding)
        ids = sorted(parents)
        a = data.draw(st.sampled_from(ids))
        b = data.draw(st.sampled_from(ids))
        s = tax.similarity(a, b)
        assert 0 < s <= 1
        assert s == tax.similarity(b, a)
        assert (s == 1) == (a == b)

    @settings(max_examples=150, deadline=None)
    @given(trees)
    def test_depth_increments_along_edges(self, encoding):
        parents, tax = tree_from(encoding)
        for child, parent in parents.items():
            if parent is None:
                assert tax.depth(child) == 1
            else:
                assert tax.depth(child) - tax.depth(parent) == 1
            assert tax.depth(child) == oracles.depth(parents, child)

    @settings(max_examples=150, deadline=None)
    @given(trees, st.data())
    def test_lcs_matches_ancestor_intersection(self, encoding, data):
        parents, tax = tree_from(encoding)
        ids = sorted(parents)
        a = data.draw(st.sampled_from(ids))
        b = data.draw(st.sampled_from(ids))
        got = tax.lcs(a, b)
        assert got == oracles.lcs(parents, a, b)
        assert got in oracles.ancestors(parents, a) and got in oracles.ancestors(parents, b)
        for child in tax.children(got):
            assert not (child in oracles.ancestors(parents, a) and child in oracles.ancestors(parents, b))
        assert tax.similarity(a, b) == oracles.similarity(parents, a, b)

    @settings(max_examples=100, deadline=None)
    @given(trees, st.data())
    def test_proper_ancestor_case(self, encoding, data):
        parents, tax = tree_from(encoding)
        b = data.draw(st.sampled_from(sorted(parents)))
        chain = oracles.ancestors(parents, b)[1:]
        if not chain:
            return
        a = data.draw(st.sampled_from(chain))
        expected = Fraction(2 * tax.depth(a), tax.depth(a) + tax.depth(b))
        assert tax.similarity(a, b) == expected < 1
