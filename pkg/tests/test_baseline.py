import math

import numpy as np
import pytest

from edgehome.actions import parse_assistant_output
from edgehome.baseline import (
    BaselinePrediction,
    TfidfVectorizer,
    load_model,
    predict,
    save_model,
    train,
)
from edgehome.defaults import builtin_catalog, default_home
from edgehome.errors import DegenerateLabels, EmptyCorpus, UnreadableFile

THREE_DOCS = ["turn on light", "turn off light", "start timer"]

# A tiny separable command corpus: each label owns distinctive keywords.
TOY_UTTERANCES = [
    ("turn on the kitchen light", "light.kitchen|light.turn_on"),
    ("switch on the kitchen light", "light.kitchen|light.turn_on"),
    ("kitchen light on please", "light.kitchen|light.turn_on"),
    ("put the kitchen light on", "light.kitchen|light.turn_on"),
    ("light up the kitchen", "light.kitchen|light.turn_on"),
    ("turn off the kitchen light", "light.kitchen|light.turn_off"),
    ("switch off the kitchen light", "light.kitchen|light.turn_off"),
    ("kitchen light off now", "light.kitchen|light.turn_off"),
    ("kill the kitchen light", "light.kitchen|light.turn_off"),
    ("darken the kitchen please", "light.kitchen|light.turn_off"),
    ("lock the front door", "lock.front_door|lock.lock"),
    ("secure the front door", "lock.front_door|lock.lock"),
    ("bolt the front door", "lock.front_door|lock.lock"),
    ("front door lock please", "lock.front_door|lock.lock"),
    ("make sure the front door is locked", "lock.front_door|lock.lock"),
    ("open the garage door", "cover.garage|cover.open"),
    ("raise the garage door", "cover.garage|cover.open"),
    ("garage door up please", "cover.garage|cover.open"),
    ("roll up the garage door", "cover.garage|cover.open"),
    ("let the car out open the garage", "cover.garage|cover.open"),
]


def toy_model(seed=0):
    corpus = [u for u, _ in TOY_UTTERANCES]
    labels = [label for _, label in TOY_UTTERANCES]
    vectorizer = TfidfVectorizer().fit(corpus)
    return train(corpus, labels, vectorizer, seed=seed), vectorizer


def test_idf_oracle_three_documents():
    vec = TfidfVectorizer().fit(THREE_DOCS)
    assert list(vec.vocabulary) == ["light", "off", "on", "start", "timer", "turn"]
    # df(light)=df(turn)=2, everything else 1; N=3
    expect_two = math.log(4 / 3) + 1
    expect_one = math.log(2) + 1
    by_term = {t: vec.idf[i] for t, i in vec.vocabulary.items()}
    assert abs(by_term["light"] - expect_two) < 1e-12
    assert abs(by_term["turn"] - expect_two) < 1e-12
    for term in ("off", "on", "start", "timer"):
        assert abs(by_term[term] - expect_one) < 1e-12


def test_idf_single_document_is_one():
    vec = TfidfVectorizer().fit(["alpha beta alpha"])
    assert np.allclose(vec.idf, 1.0)


def test_transform_counts_and_l2_norm():
    vec = TfidfVectorizer().fit(THREE_DOCS)
    row = vec.transform("light light on")
    raw = {vec.vocabulary["light"]: 2 * (math.log(4 / 3) + 1),
           vec.vocabulary["on"]: 1 * (math.log(2) + 1)}
    norm = math.sqrt(sum(v * v for v in raw.values()))
    got = dict(zip(row.indices.tolist(), row.values.tolist()))
    assert set(got) == set(raw)
    for index, value in raw.items():
        assert abs(got[index] - value / norm) < 1e-12
    assert abs(float(row.values @ row.values) - 1.0) < 1e-12


def test_transform_unknown_tokens_is_empty():
    vec = TfidfVectorizer().fit(THREE_DOCS)
    row = vec.transform("zzz qqq")
    assert row.indices.size == 0 and row.values.size == 0


def test_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        TfidfVectorizer().fit([])
    with pytest.raises(EmptyCorpus):
        TfidfVectorizer().fit(["...", "!!!"])


def test_degenerate_labels_rejected():
    vec = TfidfVectorizer().fit(THREE_DOCS)
    with pytest.raises(DegenerateLabels):
        train(THREE_DOCS, ["x|y"] * 3, vec)


def test_separable_corpus_reaches_full_training_accuracy():
    model, vec = toy_model()
    hits = 0
    for utterance, label in TOY_UTTERANCES:
        prediction = predict(utterance, model, vec)
        got = f"{prediction.device}|{prediction.service}"
        hits += got == label
    assert hits == len(TOY_UTTERANCES)


def test_training_is_bitwise_deterministic():
    model_a, _ = toy_model(seed=7)
    model_b, _ = toy_model(seed=7)
    assert np.array_equal(model_a.weights, model_b.weights)
    assert np.array_equal(model_a.bias, model_b.bias)
    model_c, _ = toy_model(seed=8)
    assert not np.array_equal(model_a.weights, model_c.weights)


def test_labels_sorted_and_empty_features_pick_first():
    model, vec = toy_model()
    assert model.labels == sorted(model.labels)
    prediction = predict("xyzzy plugh", model, vec)
    device, service = model.labels[0].split("|", 1)
    assert prediction.device == device and prediction.service == service


def test_response_template_uses_registry_friendly_name():
    model, vec = toy_model()
    registry = default_home()
    # no toy label device lives in the default home, so force a known one
    prediction = BaselinePrediction("switch.turn_on", "switch.basement_lights",
                                    "Okay, executing switch.turn_on on Basement Lights Switch.")
    assert "Basement Lights Switch" in prediction.response_text
    fallback = predict("lock the front door", model, vec, registry)
    assert fallback.device == "lock.front_door"
    assert "front door" in fallback.response_text  # object id fallback, underscores stripped


def test_prediction_round_trips_through_shared_parser():
    model, vec = toy_model()
    prediction = predict("open the garage door", model, vec)
    assert prediction.service == "cover.open" and prediction.device == "cover.garage"

    from edgehome.model import Device, DeviceRegistry, DeviceState, parse_entity_id

    registry = DeviceRegistry()
    registry.add(Device(parse_entity_id("cover.garage"), "Garage Door", DeviceState("closed")))
    catalog = builtin_catalog()
    parsed = parse_assistant_output(prediction.to_assistant_text(), catalog, registry)
    assert parsed.outcome.ok
    assert parsed.action.service.canonical == "cover.open"
    assert parsed.action.target_device.canonical == "cover.garage"
    assert parsed.response_text == prediction.response_text


def test_persistence_round_trip(tmp_path):
    model, vec = toy_model()
    path = tmp_path / "baseline.json"
    save_model(str(path), model, vec)
    loaded_model, loaded_vec = load_model(str(path))
    assert loaded_model.labels == model.labels
    assert np.array_equal(loaded_model.weights, model.weights)
    assert np.array_equal(loaded_model.bias, model.bias)
    assert loaded_vec.vocabulary == vec.vocabulary
    for utterance, _ in TOY_UTTERANCES:
        assert predict(utterance, loaded_model, loaded_vec) == predict(utterance, model, vec)


def test_load_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"format": "something-else", "version": 1}')
    with pytest.raises(UnreadableFile):
        load_model(str(path))
    missing = tmp_path / "nope.json"
    with pytest.raises(UnreadableFile):
        load_model(str(missing))
