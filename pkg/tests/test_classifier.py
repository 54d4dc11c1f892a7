"""Per-class diagonal GMMs: standardization, EM behaviour, K selection,
decision rule, and the plain-text model format."""

import math

import numpy as np
import pytest

from spsgmm.classifier import (
    DEFAULT_K_GRID,
    GmmModel,
    Mixture,
    Standardizer,
    _estep,
    fit_gmm,
    grid_search,
    late_fuse_score,
    load_model,
    model_from_text,
    model_to_text,
    save_model,
    score,
)
from spsgmm.errors import FitError, InputError
from spsgmm.sps_features import FeatureVector


def fvs(X, label, kind="sps_p"):
    return [
        FeatureVector(
            kind=kind,
            values=np.asarray(row, np.float64),
            label=label,
            source_id=f"{label}-{i}",
            interval_index=0,
        )
        for i, row in enumerate(X)
    ]


def blobs(seed, n_per_class, d=2, sep=8.0):
    """Two well-separated unit-variance clouds."""
    rng = np.random.default_rng(seed)
    Xs = rng.normal(-sep / 2, 1.0, (n_per_class, d))
    Xm = rng.normal(+sep / 2, 1.0, (n_per_class, d))
    return fvs(Xs, "speech") + fvs(Xm, "music")


def flat_model(kind="sps_p", d=2, mu_speech=0.0, mu_music=0.0):
    """Hand-built single-component model with unit standardization."""
    mk = lambda mu: Mixture(
        weights=np.array([1.0]),
        means=np.full((1, d), mu),
        vars=np.ones((1, d)),
        log_prior=math.log(0.5),
    )
    return GmmModel(
        feature_kind=kind,
        standardizer=Standardizer(mean=np.zeros(d), std=np.ones(d)),
        classes={"speech": mk(mu_speech), "music": mk(mu_music)},
    )


class TestStandardizer:
    def test_pooled_zscore(self):
        rng = np.random.default_rng(3)
        X = rng.normal(5.0, 3.0, (40, 4))
        std = Standardizer(mean=X.mean(axis=0), std=np.maximum(X.std(axis=0), 1e-8))
        Z = std.apply(X)
        np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(Z.std(axis=0), 1.0, rtol=1e-12)

    def test_constant_dimension_floored(self):
        train = fvs(np.array([[1.0, 2.0]] * 6), "speech") + fvs(
            np.array([[1.0, 5.0]] * 6), "music"
        )
        model = fit_gmm(train, K=1)
        assert model.standardizer.std[0] == 1e-8  # first dim constant across pool


class TestFitGmm:
    def test_k1_closed_form(self):
        train = blobs(1, 30, d=3)
        model = fit_gmm(train, K=1, seed=5)
        pooled = np.stack([f.values for f in train])
        np.testing.assert_allclose(model.standardizer.mean, pooled.mean(axis=0))
        np.testing.assert_allclose(
            model.standardizer.std, np.maximum(pooled.std(axis=0), 1e-8)
        )
        for label in ("speech", "music"):
            X = np.stack([f.values for f in train if f.label == label])
            Z = model.standardizer.apply(X)
            mix = model.classes[label]
            np.testing.assert_array_equal(mix.weights, [1.0])
            np.testing.assert_allclose(mix.means[0], Z.mean(axis=0), rtol=1e-9, atol=1e-12)
            floor = np.maximum(1e-6 * Z.var(axis=0), 1e-12)
            np.testing.assert_allclose(
                mix.vars[0], np.maximum(Z.var(axis=0), floor), rtol=1e-9
            )
            assert mix.log_prior == pytest.approx(math.log(0.5))

    def test_unbalanced_priors(self):
        train = fvs(np.random.default_rng(0).normal(0, 1, (30, 2)), "speech") + fvs(
            np.random.default_rng(1).normal(5, 1, (10, 2)), "music"
        )
        model = fit_gmm(train, K=1)
        assert model.classes["speech"].log_prior == pytest.approx(math.log(0.75))
        assert model.classes["music"].log_prior == pytest.approx(math.log(0.25))

    def test_separated_blobs_classified(self):
        train = blobs(2, 40)
        model = fit_gmm(train, K=2, seed=0)
        test = blobs(99, 25)
        decisions = [score(model, f).decision for f in test]
        assert decisions == [f.label for f in test]
        for f, d in zip(test, decisions):
            s = score(model, f)
            assert (s.margin >= 0) == (d == "speech")

    def test_em_trace_nondecreasing(self):
        train = blobs(4, 120, d=2)
        model = fit_gmm(train, K=4, seed=7)
        for label in ("speech", "music"):
            trace = model.train_meta["em_trace"][label]
            assert len(trace) >= 2
            diffs = np.diff(np.asarray(trace))
            assert np.all(diffs >= -1e-9)

    def test_weights_on_simplex(self):
        train = blobs(5, 100, d=2)
        model = fit_gmm(train, K=8, seed=3)
        for mix in model.classes.values():
            assert np.all(mix.weights >= 0)
            assert mix.weights.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(mix.vars > 0)

    def test_responsibilities_sum_to_one(self):
        rng = np.random.default_rng(11)
        X = rng.normal(0, 1, (50, 3))
        mix = Mixture(
            weights=np.array([0.25, 0.75]),
            means=rng.normal(0, 1, (2, 3)),
            vars=rng.uniform(0.5, 2.0, (2, 3)),
            log_prior=math.log(0.5),
        )
        resp, ll = _estep(X, mix)
        np.testing.assert_allclose(resp.sum(axis=1), 1.0, atol=1e-12)
        assert np.isfinite(ll)

    def test_deterministic_given_seed(self):
        train = blobs(6, 60)
        a = fit_gmm(train, K=4, seed=42)
        b = fit_gmm(train, K=4, seed=42)
        assert model_to_text(a) == model_to_text(b)

    def test_too_few_vectors_for_k(self):
        train = blobs(7, 5, d=4)  # needs K*d = 12 per class
        with pytest.raises(FitError, match="needs at least"):
            fit_gmm(train, K=3)

    def test_empty_and_mixed_inputs(self):
        with pytest.raises(InputError, match="empty"):
            fit_gmm([], K=1)
        mixed = fvs([[0.0, 1.0]], "speech") + fvs([[1.0, 0.0]], "music", kind="sps_zcr")
        with pytest.raises(InputError, match="mixed feature kinds"):
            fit_gmm(mixed, K=1)
        speech_only = fvs(np.zeros((4, 2)), "speech")
        with pytest.raises(FitError, match="music"):
            fit_gmm(speech_only, K=1)
        bad_label = [
            FeatureVector(kind="sps_p", values=np.zeros(2), label=None),
            *fvs(np.ones((2, 2)), "music"),
        ]
        with pytest.raises(InputError, match="unlabeled"):
            fit_gmm(bad_label, K=1)


class TestGridSearch:
    def test_singleton_grid_matches_direct_fit(self):
        train = blobs(8, 40)
        g = grid_search(train, grid=[1], seed=9)
        direct = fit_gmm(train, K=1, seed=9)
        assert g.train_meta["chosen_k"] == 1
        for label in ("speech", "music"):
            np.testing.assert_array_equal(
                g.classes[label].means, direct.classes[label].means
            )
            np.testing.assert_array_equal(
                g.classes[label].vars, direct.classes[label].vars
            )

    def test_ties_prefer_smaller_k(self):
        # both K values separate the blobs perfectly, so validation F ties
        train = blobs(10, 50)
        model = grid_search(train, grid=[2, 1], seed=0)
        assert model.train_meta["chosen_k"] == 1
        vf = model.train_meta["validation_f"]
        assert vf[1] == vf[2] == 1.0

    @pytest.mark.filterwarnings("ignore:grid entries")
    @pytest.mark.parametrize("seed", range(10))
    def test_unimodal_blobs_choose_k1(self, seed):
        train = blobs(100 + seed, 60)
        model = grid_search(train, grid=DEFAULT_K_GRID, seed=seed)
        assert model.train_meta["chosen_k"] == 1

    def test_infeasible_entries_warn_and_skip(self):
        train = blobs(12, 10, d=2)  # inner split: 8 per class
        with pytest.warns(UserWarning, match="skipped"):
            model = grid_search(train, grid=[1, 64], seed=1)
        assert model.train_meta["chosen_k"] == 1
        assert model.train_meta["skipped"] == [64]

    def test_no_feasible_k(self):
        train = blobs(13, 25, d=2)
        with pytest.warns(UserWarning, match="skipped"):
            with pytest.raises(FitError, match="no feasible K"):
                grid_search(train, grid=[64], seed=0)

    def test_empty_grid(self):
        with pytest.raises(FitError, match="empty K grid"):
            grid_search(blobs(14, 10), grid=[], seed=0)


class TestScore:
    def test_exact_tie_goes_to_speech(self):
        model = flat_model()
        s = score(model, FeatureVector(kind="sps_p", values=np.zeros(2)))
        assert s.margin == 0.0
        assert s.decision == "speech"
        assert s.log_lik_speech == s.log_lik_music

    def test_kind_and_dim_guards(self):
        model = flat_model(kind="sps_p", d=2)
        with pytest.raises(InputError, match="model expects sps_p"):
            score(model, FeatureVector(kind="sps_zcr", values=np.zeros(2)))
        with pytest.raises(InputError, match="dim"):
            score(model, FeatureVector(kind="sps_p", values=np.zeros(3)))

    def test_margin_moves_with_evidence(self):
        model = flat_model(mu_speech=-2.0, mu_music=2.0)
        toward_speech = score(model, FeatureVector(kind="sps_p", values=np.full(2, -2.0)))
        toward_music = score(model, FeatureVector(kind="sps_p", values=np.full(2, 2.0)))
        assert toward_speech.decision == "speech" and toward_speech.margin > 0
        assert toward_music.decision == "music" and toward_music.margin < 0


class TestLateFusion:
    def _models_and_features(self, winner="speech"):
        sign = -1.0 if winner == "speech" else 1.0
        models, feats = {}, {}
        for kind, d in (("sps_p", 2), ("sps_zcr", 2), ("sps_scg", 6)):
            models[kind] = flat_model(kind=kind, d=d, mu_speech=sign, mu_music=-sign)
            feats[kind] = FeatureVector(
                kind=kind, values=np.full(d, -1.0), source_id="x", interval_index=4
            )
        return models, feats

    def test_fused_decision(self):
        models, feats = self._models_and_features(winner="speech")
        assert late_fuse_score(models, feats).decision == "speech"
        models, feats = self._models_and_features(winner="music")
        assert late_fuse_score(models, feats).decision == "music"

    def test_provenance_mismatch(self):
        models, feats = self._models_and_features()
        feats["sps_zcr"] = FeatureVector(
            kind="sps_zcr", values=np.zeros(2), source_id="other", interval_index=4
        )
        with pytest.raises(InputError, match="provenance"):
            late_fuse_score(models, feats)

    def test_missing_kind(self):
        models, feats = self._models_and_features()
        del models["sps_p"]
        with pytest.raises(InputError, match="late fusion"):
            late_fuse_score(models, feats)


class TestModelFormat:
    def test_roundtrip_exact(self):
        model = fit_gmm(blobs(20, 30), K=2, seed=1)
        text = model_to_text(model)
        assert text.startswith("spsgmm v1\n")
        back = model_from_text(text)
        assert back.feature_kind == model.feature_kind
        assert back.train_meta["chosen_k"] == 2
        np.testing.assert_array_equal(back.standardizer.mean, model.standardizer.mean)
        np.testing.assert_array_equal(back.standardizer.std, model.standardizer.std)
        for label in ("speech", "music"):
            a, b = model.classes[label], back.classes[label]
            np.testing.assert_array_equal(a.weights, b.weights)
            np.testing.assert_array_equal(a.means, b.means)
            np.testing.assert_array_equal(a.vars, b.vars)
            assert a.log_prior == b.log_prior
        assert model_to_text(back) == text

    def test_save_load_byte_stable(self, tmp_path):
        model = grid_search(blobs(21, 20), grid=[1, 2], seed=2)
        path = tmp_path / "m.txt"
        save_model(model, path)
        first = path.read_bytes()
        save_model(load_model(path), path)
        assert path.read_bytes() == first

    def test_scores_survive_roundtrip(self, tmp_path):
        model = fit_gmm(blobs(22, 30), K=2, seed=3)
        path = tmp_path / "m.txt"
        save_model(model, path)
        back = load_model(path)
        f = FeatureVector(kind="sps_p", values=np.array([0.3, -4.0]))
        assert score(model, f) == score(back, f)

    @pytest.mark.parametrize(
        "text,match",
        [
            ("hello\n", "not a spsgmm v1"),
            ("spsgmm v1\nclass cats\n", "unknown class"),
            ("spsgmm v1\nbogus line\n", "unexpected line"),
            ("spsgmm v1\nmeta\nfeature_kind sps_p\n", "incomplete"),
        ],
    )
    def test_malformed_files(self, text, match):
        with pytest.raises(InputError, match=match):
            model_from_text(text)
