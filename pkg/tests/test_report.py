from fractions import Fraction

import pytest

from asrf import report
from asrf.report import ReportTable, TimingRecord


def ratio(percent: str) -> Fraction:
    return Fraction(percent) / 100


class TestWerTable:
    def test_single_model_single_dataset(self):
        table = report.wer_table({"m": {"d": Fraction(1, 10)}}, ["d"])
        assert [row[0] for row in table.rows] == ["d", "Average", "Median"]
        assert table.rows[0][1] == table.rows[1][1] == table.rows[2][1] == Fraction(10)

    def test_ragged_input(self):
        with pytest.raises(report.RaggedInput):
            report.wer_table({"m1": {"d1": 0.1}, "m2": {}}, ["d1"])

    def test_average_median_recomputed_independently(self):
        wers = {"m": {f"d{i}": Fraction(i, 100) for i in range(1, 5)}}
        table = report.wer_table(wers, [f"d{i}" for i in range(1, 5)])
        values = [row[1] for row in table.rows[:-2]]
        assert table.rows[-2][1] == sum(values) / len(values)
        ordered = sorted(values)
        assert table.rows[-1][1] == (ordered[1] + ordered[2]) / 2

    def test_robustness_footnote(self):
        table = report.wer_table({"m": {"d1": 0.1, "d2": 0.3}}, ["d1", "d2"])
        assert any("robustness m" in note for note in table.footnotes)


class TestProportionsTable:
    def test_uniform_eight(self):
        table = report.proportions_table(list(range(1, 9)))
        shares = [row[2] for row in table.rows]
        assert all(s == Fraction(25, 2) for s in shares)
        assert report.format_cell(shares[0]) == "12.50"

    def test_all_major(self):
        table = report.proportions_table([3, 3, 3])
        by_cat = {row[0]: row[2] for row in table.rows}
        assert by_cat["3"] == Fraction(100)
        assert sum(row[2] for row in table.rows) == Fraction(100)

    def test_sum_is_100_before_rounding(self):
        labels = [1, 1, 2, 3, 3, 3, 5, 8, 4, 6, 7, 2, 3]
        table = report.proportions_table(labels)
        assert sum(row[2] for row in table.rows) == Fraction(100)

    def test_empty(self):
        with pytest.raises(report.EmptyInput):
            report.proportions_table([])

    def test_utterance_column(self):
        table = report.proportions_table([1, 3], utterance_categories=[1])
        assert "utterance share (%)" in table.columns


class TestRtfTable:
    def test_rtf_value(self):
        table = report.rtf_table([TimingRecord("m", 0.5, 100.0)])
        assert table.rows[0][1] == "0.0050"
        assert table.rows[0][2] == Fraction(100)

    def test_relative_speed(self):
        table = report.rtf_table([TimingRecord("fast", 0.5, 100.0),
                                  TimingRecord("slow", 1.0, 100.0)])
        speeds = {row[0]: row[2] for row in table.rows}
        assert speeds["fast"] == Fraction(100)
        assert speeds["slow"] == Fraction(200)

    def test_speed_uses_unrounded_rtf(self):
        # 0.0158 and 0.0100 round to 0.02/0.01 at two decimals; the true
        # ratio (158%) must survive.
        table = report.rtf_table([TimingRecord("a", 1.0, 100.0),
                                  TimingRecord("b", 1.58, 100.0)])
        speeds = {row[0]: row[2] for row in table.rows}
        assert report.format_cell(speeds["b"]) == "158.00"

    def test_zero_audio(self):
        with pytest.raises(report.ZeroAudio):
            report.rtf_table([TimingRecord("m", 1.0, 0.0)])


class TestRender:
    TABLE = ReportTable(
        title="t", columns=("a", "b"),
        rows=(("x, y", Fraction(1, 3)), ("plain", 2.0)),
        footnotes=("note",))

    def test_deterministic(self):
        for fmt in ("csv", "json", "md"):
            assert report.render(self.TABLE, fmt) == report.render(self.TABLE, fmt)

    def test_csv_quotes_commas(self):
        out = report.render(self.TABLE, "csv").decode()
        assert '"x, y"' in out
        assert "0.33" in out

    def test_header_only(self):
        table = ReportTable("t", ("a", "b"), ())
        out = report.render(table, "csv").decode()
        assert out == "a,b\r\n"

    def test_md_pipe_table(self):
        out = report.render(self.TABLE, "md").decode()
        assert "| a | b |" in out
        assert "| plain | 2.00 |" in out

    def test_json_shape(self):
        import json

        payload = json.loads(report.render(self.TABLE, "json"))
        assert payload["columns"] == ["a", "b"]
        assert payload["rows"][0] == ["x, y", "0.33"]

    def test_unknown_format(self):
        with pytest.raises(Exception):
            report.render(self.TABLE, "xml")

    def test_half_up_rounding(self):
        assert report.round_half_up(Fraction(1, 8)) == "0.13"
        assert report.round_half_up(Fraction(9655, 1000)) == "9.66"
        assert report.round_half_up(Fraction(25, 1000)) == "0.03"
        assert report.round_half_up(2.675) == "2.68"

    def test_ragged_rows_rejected(self):
        with pytest.raises(report.RaggedInput):
            ReportTable("t", ("a",), (("x", "y"),))
