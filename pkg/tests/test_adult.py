import numpy as np
import pytest

from fairsynth import ValidationError, fit_encoder, load_csv, surrogate_adult
from fairsynth.adult import (
    ADULT_HEADER,
    ADULT_ROWS,
    adult_schema,
    prepare_adult_csv,
    verify_adult_csv,
)


class TestSchema:
    def test_default_roles(self):
        schema = adult_schema()
        assert schema.target.name == "income"
        assert schema.target.positive_class == ">50K"
        assert [c.name for c in schema.protected] == ["sex"]
        order = [schema.columns[i].name for i in schema.generation_order]
        assert order[0] == "sex" and order[-1] == "income"

    def test_intersectional_roles(self):
        schema = adult_schema(protected=("sex", "race"))
        assert [c.name for c in schema.protected] == ["race", "sex"]


class TestPrepareAndVerify:
    def _raw(self, tmp_path, n_rows):
        row = "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, " \
              "Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K"
        path = tmp_path / "adult.data"
        path.write_text("\n".join([row] * n_rows) + "\n\n", encoding="utf-8")
        return path

    def test_prepends_header_and_trims(self, tmp_path):
        raw = self._raw(tmp_path, 5)
        out = tmp_path / "adult.csv"
        with pytest.raises(ValidationError, match="expected 32561"):
            prepare_adult_csv(raw, out)  # verification runs on the output
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(ADULT_HEADER)
        assert lines[1].startswith("39,State-gov,77516")  # padding removed
        data = load_csv(out, adult_schema())
        assert data.n_rows == 5
        assert data.column("workclass")[0] == "State-gov"

    def test_verify_checks_row_count_and_sha(self, tmp_path):
        raw = self._raw(tmp_path, ADULT_ROWS)
        out = tmp_path / "adult.csv"
        record = prepare_adult_csv(raw, out)
        assert record["rows"] == ADULT_ROWS
        assert len(record["sha256"]) == 64
        with pytest.raises(ValidationError, match="mismatch"):
            verify_adult_csv(out, expected_sha256="0" * 64)
        sidecar = tmp_path / "adult.csv.sha256"
        sidecar.write_text(record["sha256"] + "\n")
        assert verify_adult_csv(out)["pinned"] is True
        sidecar.write_text("f" * 64 + "\n")
        with pytest.raises(ValidationError, match="pinned"):
            verify_adult_csv(out)


class TestSurrogate:
    def test_deterministic(self):
        a = surrogate_adult(n=500, seed=3)
        b = surrogate_adult(n=500, seed=3)
        assert a.columns == b.columns
        c = surrogate_adult(n=500, seed=4)
        assert a.columns != c.columns

    def test_headline_statistics(self):
        data = surrogate_adult(seed=0)
        assert data.n_rows == ADULT_ROWS
        sex = np.array(data.column("sex"))
        income = np.array(data.column("income"))
        assert abs((sex == "Male").mean() - 0.669) < 0.01
        assert abs((income == ">50K").mean() - 0.24) < 0.02
        gain = np.array(data.column("capital-gain"))
        assert 0.90 <= (gain == 0).mean() <= 0.93
        assert any(v is None for v in data.column("workclass"))  # "?" tokens
        assert any(v is None for v in data.column("native-country"))

    def test_roundtrips_through_csv_and_encoder(self, tmp_path):
        data = surrogate_adult(n=1000, seed=1)
        path = tmp_path / "s.csv"
        data.write_csv(path)
        again = load_csv(path, data.schema)
        assert again.column("sex") == data.column("sex")
        assert again.column("age") == data.column("age")
        enc = fit_encoder(data)
        assert enc.cardinality("income") == 2
