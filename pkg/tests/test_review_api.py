import json
import math
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from asrf import audioqc, classify, ingest
from asrf.review import build_app

FIXTURES = Path(__file__).parent / "fixtures" / "corpus"


@pytest.fixture()
def corpus():
    references = ingest.load_references(str(FIXTURES / "references.jsonl"))
    hypotheses = ingest.load_hypotheses(str(FIXTURES / "hypotheses.jsonl"))
    labeled = classify.classify_corpus(references, hypotheses, classify.load_lexicons())
    records = [classify.LabelRecord(item.span.utterance_id, item.span.model_id,
                                    item.span.span_index, item.label)
               for item in labeled]
    return references, hypotheses, records


@pytest.fixture()
def client(corpus, tmp_path):
    references, hypotheses, records = corpus
    annotations = tmp_path / "annotations.jsonl"
    app = build_app(references, hypotheses, records, str(annotations))
    with TestClient(app) as c:
        c.annotations_path = annotations
        yield c


class TestQueue:
    def test_flawed_ground_truth_proposal_queued(self, client):
        page = client.get("/api/queue").json()
        ids = [item["utterance_id"] for item in page["items"]]
        assert "u001" in ids
        item = next(i for i in page["items"] if i["utterance_id"] == "u001")
        assert item["proposed_category"] == 6

    def test_stable_order_and_paging(self, client):
        full = client.get("/api/queue", params={"limit": 100}).json()
        ids = [i["utterance_id"] for i in full["items"]]
        assert ids == sorted(ids)
        page = client.get("/api/queue", params={"limit": 1, "offset": 0}).json()
        assert [i["utterance_id"] for i in page["items"]] == ids[:1]
        assert page["total"] == full["total"]

    def test_only_needs_human_items(self, client, corpus):
        _, _, records = corpus
        needs_human = {r.utterance_id for r in records if r.label.needs_human}
        page = client.get("/api/queue", params={"limit": 100}).json()
        assert {i["utterance_id"] for i in page["items"]} == needs_human

    def test_labeled_item_leaves_queue(self, client):
        before = client.get("/api/queue", params={"limit": 100}).json()
        assert any(i["utterance_id"] == "u001" for i in before["items"])
        response = client.post("/api/label", json={
            "utterance_id": "u001", "category": 6, "annotator": "tester"})
        assert response.status_code == 200
        after = client.get("/api/queue", params={"limit": 100}).json()
        assert all(i["utterance_id"] != "u001" for i in after["items"])
        assert after["total"] == before["total"] - 1

    def test_queue_union_labeled_covers_all(self, client, corpus):
        _, _, records = corpus
        needs_human = {r.utterance_id for r in records if r.label.needs_human}
        client.post("/api/label", json={
            "utterance_id": "u001", "category": 6, "annotator": "tester"})
        page = client.get("/api/queue", params={"limit": 100}).json()
        remaining = {i["utterance_id"] for i in page["items"]}
        labeled = set(ingest.load_annotations(str(client.annotations_path)))
        assert remaining | labeled == needs_human


class TestSample:
    def test_existing_item_has_diffs(self, client):
        item = client.get("/api/sample/u001").json()
        assert item["reference"].startswith("auf der bruecke")
        assert len(item["models"]) == 3
        kinds = {op["kind"] for model in item["models"] for op in model["ops"]}
        assert "substitute" in kinds

    def test_unknown_id_404(self, client):
        assert client.get("/api/sample/nope").status_code == 404

    def test_audio_absent_404(self, client):
        assert client.get("/api/audio/u001").status_code == 404


class TestAudioEndpoint:
    def test_streams_wav_bytes(self, tmp_path):
        wav_path = tmp_path / "clip.wav"
        samples = tuple(round(5000 * math.sin(i / 20)) for i in range(8000))
        audioqc.write_wav(str(wav_path), audioqc.AudioClip(16000, samples))
        references = [ingest.Utterance("a1", "d", "ein wort", audio_path=str(wav_path))]
        hypotheses = [ingest.Hypothesis("a1", "m", "ein wort")]
        app = build_app(references, hypotheses, [], str(tmp_path / "ann.jsonl"))
        with TestClient(app) as client:
            response = client.get("/api/audio/a1")
            assert response.status_code == 200
            assert response.content == wav_path.read_bytes()
            item = client.get("/api/sample/a1").json()
            assert item["has_audio"] is True


class TestLabelEndpoint:
    def test_stores_annotation_record(self, client):
        response = client.post("/api/label", json={
            "utterance_id": "u001", "category": 6,
            "subtags": ["year-style"], "annotator": "tester", "note": "checked"})
        assert response.status_code == 200
        body = response.json()
        assert body["provenance"] == "human"
        assert body["timestamp"]
        table = ingest.load_annotations(str(client.annotations_path))
        assert table["u001"].category == 6
        assert table["u001"].note == "checked"

    def test_category_zero_rejected(self, client):
        response = client.post("/api/label", json={
            "utterance_id": "u001", "category": 0, "annotator": "t"})
        assert response.status_code == 400

    def test_category_nine_rejected(self, client):
        response = client.post("/api/label", json={
            "utterance_id": "u001", "category": 9, "annotator": "t"})
        assert response.status_code == 400

    def test_unknown_utterance_404(self, client):
        response = client.post("/api/label", json={
            "utterance_id": "zzz", "category": 3, "annotator": "t"})
        assert response.status_code == 404

    def test_relabel_last_wins(self, client):
        for category in (3, 6):
            client.post("/api/label", json={
                "utterance_id": "u001", "category": category, "annotator": "t"})
        table = ingest.load_annotations(str(client.annotations_path))
        assert table["u001"].category == 6

    def test_file_stays_valid_jsonl(self, client):
        for category in (1, 2, 3):
            client.post("/api/label", json={
                "utterance_id": "u001", "category": category, "annotator": "t"})
        lines = client.annotations_path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3
        for line in lines:
            json.loads(line)


class TestCategoriesEndpoint:
    def test_lists_all_eight(self, client):
        body = client.get("/api/categories").json()
        assert [c["category"] for c in body] == list(range(1, 9))
