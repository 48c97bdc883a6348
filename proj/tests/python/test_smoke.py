import json

import _claimpkg as cp


def make_kg():
    return cp.KnowledgeGraph.from_triples(
        [
            ("Ajoblanco", "region", "Andalusia"),
            ("Ajoblanco", "ingredient", "Garlic"),
            ("Catalonia", "leader name", "Maria Norrfalk"),
        ]
    )


def test_label_helpers():
    assert cp.normalize_label("Twilight_(band)") == "Twilight (band)"
    assert cp.toggle_inverse("~genre") == "genre"
    assert cp.levenshtein("kitten", "sitting") == 3
    assert abs(cp.sim_fuzzy("kitten", "sitting") - 4 / 7) < 1e-12
    assert cp.sim_exact("a", "a") == 1.0


def test_kg_queries():
    kg = make_kg()
    assert kg.triple_count() == 3
    assert kg.has_entity("Garlic")
    assert kg.has_edge("Garlic", "~ingredient", "Ajoblanco")
    assert ("region", "Andalusia") in kg.neighbors("Ajoblanco")


def test_parse_and_retrieve():
    kg = make_kg()
    canon = cp.parse_pseudo_subgraph("<e>Ajoblanco</e> || region || unknown_7\n")
    assert canon == "<e>Ajoblanco</e> || region || unknown_0\n"

    evidence = cp.retrieve(
        kg, ["<e>Ajoblanco</e> || region || unknown_0\n"], k1=1, scorer="exact"
    )
    assert evidence == [("Ajoblanco", "region", "Andalusia")]


def test_metrics():
    kg = make_kg()
    beams = ["<e>Ajoblanco</e> || region || <e>Andalusia</e>\n"]
    assert cp.entity_correctness(beams, kg) == 1.0
    assert cp.coverage(beams, beams[0]) == 1.0
    assert cp.unique_triplet_count(beams + beams) == 1


def test_training_example():
    record = {
        "claim": "Garlic is the main ingredient of Ajoblanco.",
        "entities": ["Ajoblanco", "Garlic"],
        "evidence": [["Ajoblanco", ["ingredient"], "Garlic"]],
    }
    text, label = cp.build_training_example(json.dumps(record))
    assert text == record["claim"]
    assert label == "<e>Ajoblanco</e> || ingredient || <e>Garlic</e>\n"
