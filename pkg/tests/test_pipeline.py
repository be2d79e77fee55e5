import numpy as np
import pytest

from orthoshadow import colorspace, invariant, params, pipeline, restore, simeval

from synth import chart_image, gradient_image, half_mask


class TestRun:
    def test_constant_image_gives_constant_outputs(self, mean_params):
        img = np.full((12, 16, 3), 0, np.uint8)
        img[:] = (170, 120, 80)
        result = pipeline.run(img, mean_params)
        for raster in (result.invariant_rgb, result.restored_rgb, result.shadow_free):
            assert (raster == raster[0, 0]).all()

    def test_stage_composition_matches_one_shot(self, mean_params, rng):
        """Emitting intermediates and resuming from them reproduces the
        pipeline output bit-exactly."""
        img = rng.integers(25, 250, (24, 30, 3)).astype(np.uint8)
        result = pipeline.run(img, mean_params)
        u0 = mean_params.u0

        u = invariant.to_log(img)
        dec = invariant.project_image(u, u0)
        ns = restore.neutral_set(u, u0)
        corrected = restore.correct(dec.up, u, u0, ns)
        shift = pipeline.exposure_shift(u0) * u0
        invariant_rgb = colorspace.from_log(dec.up + shift)
        restored_rgb = colorspace.from_log(corrected + shift)
        shadow_free = colorspace.recombine(restored_rgb, invariant_rgb)

        np.testing.assert_array_equal(result.up, dec.up)
        np.testing.assert_array_equal(result.alpha, dec.alpha)
        np.testing.assert_array_equal(result.corrected, corrected)
        np.testing.assert_array_equal(result.invariant_rgb, invariant_rgb)
        np.testing.assert_array_equal(result.restored_rgb, restored_rgb)
        np.testing.assert_array_equal(result.shadow_free, shadow_free)

    @pytest.mark.parametrize("workers", [2, 3, 8])
    def test_worker_count_does_not_change_bits(self, mean_params, workers):
        img = chart_image(40, 50)
        serial = pipeline.run(img, mean_params, workers=1)
        threaded = pipeline.run(img, mean_params, workers=workers)
        np.testing.assert_array_equal(serial.shadow_free, threaded.shadow_free)
        np.testing.assert_array_equal(serial.invariant_rgb, threaded.invariant_rgb)
        np.testing.assert_array_equal(serial.up, threaded.up)
        np.testing.assert_array_equal(serial.alpha, threaded.alpha)

    def test_consecutive_runs_identical(self, mean_params):
        img = gradient_image(30, 40, seed=9)
        a = pipeline.run(img, mean_params)
        b = pipeline.run(img, mean_params)
        np.testing.assert_array_equal(a.shadow_free, b.shadow_free)

    def test_more_workers_than_rows(self, mean_params):
        img = gradient_image(3, 40)
        result = pipeline.run(img, mean_params, workers=8)
        np.testing.assert_array_equal(
            result.shadow_free, pipeline.run(img, mean_params).shadow_free
        )

    def test_overexposure_warning(self, mean_params):
        img = np.full((10, 10, 3), 255, np.uint8)
        img[:5] = (120, 130, 90)
        result = pipeline.run(img, mean_params)
        assert any("overexposure" in w for w in result.warnings)
        clean = pipeline.run(img[:5], mean_params)
        assert clean.warnings == []

    def test_rejects_bad_shapes(self, mean_params):
        with pytest.raises(ValueError, match="H, W, 3"):
            pipeline.run(np.zeros((4, 4), np.uint8), mean_params)


class TestShadowFreeConfig:
    def test_emits_requested_rasters(self):
        img = gradient_image(20, 26)
        cfg = pipeline.PipelineConfig(
            emit=("shadow_free", "invariant", "alpha", "gray2", "mask")
        )
        outputs, result = pipeline.shadow_free(img, cfg)
        assert set(outputs) == {"shadow_free", "invariant", "alpha", "gray2", "mask"}
        assert outputs["alpha"].dtype == np.uint8
        assert set(np.unique(outputs["mask"])) <= {0, 255}
        assert result.params.label == "mean"

    def test_epsilon_kappa_defaults_match_module(self):
        cfg = pipeline.PipelineConfig()
        assert cfg.epsilon == restore.DEFAULT_EPSILON == 0.15
        assert cfg.kappa == restore.DEFAULT_KAPPA == 0.02

    def test_invalid_config_rejected(self):
        with pytest.raises(ValueError, match="epsilon"):
            pipeline.PipelineConfig(epsilon=0.0)
        with pytest.raises(ValueError, match="emit"):
            pipeline.PipelineConfig(emit=())
        with pytest.raises(ValueError, match="unknown emit"):
            pipeline.PipelineConfig(emit=("shadow_free", "gray9"))
        with pytest.raises(ValueError, match="workers"):
            pipeline.PipelineConfig(workers=0)


class TestEntropySelection:
    def test_single_candidate_returned(self, mean_params):
        img = gradient_image(10, 10)
        assert pipeline.select_params_by_entropy(img, [mean_params]) is mean_params

    def test_tie_breaks_to_first(self, mean_params):
        img = gradient_image(10, 10)
        twin = params.preset("mean")
        got = pipeline.select_params_by_entropy(img, [mean_params, twin])
        assert got is mean_params

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            pipeline.select_params_by_entropy(np.zeros((2, 2, 3), np.uint8), [])

    def test_recovers_generating_preset(self):
        generator = params.preset("40deg")
        base = gradient_image(120, 150, seed=3)
        k = params.implied_k(generator, 1.7)
        assert all(1.3 <= v <= 3.0 for v in k)
        spec = simeval.ShadowSpec(mask=half_mask(120, 150, 0.5), k=k)
        shadowed = simeval.synthesize_shadow(base, spec)
        candidates = params.all_presets()
        winner = pipeline.select_params_by_entropy(shadowed, candidates)
        scores = [pipeline.invariant_entropy(shadowed, c) for c in candidates]
        assert winner.label == candidates[int(np.argmin(scores))].label
        gen_score = scores[[c.label for c in candidates].index("40deg")]
        assert abs(gen_score - min(scores)) <= 1e-6

    def test_histogram_entropy_edge_cases(self):
        assert pipeline.histogram_entropy(np.full(100, 3.3)) == 0.0
        spread = pipeline.histogram_entropy(np.linspace(0, 1, 1000))
        peaked = pipeline.histogram_entropy(
            np.concatenate([np.zeros(990), np.linspace(0, 1, 10)])
        )
        assert spread > peaked


class TestResolveParams:
    def test_preset_source(self):
        model = pipeline.resolve_params(None, ("preset", "30deg"))
        assert model.label == "30deg"

    def test_entropy_source_defaults_to_all_presets(self):
        img = gradient_image(20, 20)
        model = pipeline.resolve_params(img, ("entropy", ()))
        assert model.label in params.PRESET_LABELS

    def test_spd_source(self, tmp_path):
        grid = params.GRID
        sky = 1.0 + 0.3 * np.sin(grid / 41.0)
        day = 1.9 * sky
        for name, values in (
            ("day", day),
            ("sky", sky),
            ("qr", np.exp(-((grid - 610) / 40.0) ** 2)),
            ("qg", np.exp(-((grid - 540) / 40.0) ** 2)),
            ("qb", np.exp(-((grid - 460) / 40.0) ** 2)),
        ):
            lines = [f"{w},{v}" for w, v in zip(grid, values)]
            (tmp_path / f"{name}.txt").write_text("\n".join(lines) + "\n")
        paths = {n: str(tmp_path / f"{n}.txt") for n in ("day", "sky", "qr", "qg", "qb")}
        model = pipeline.resolve_params(None, ("spd", paths))
        assert model.label == "estimated"
        np.testing.assert_allclose(model.k, (1.9, 1.9, 1.9))

    def test_spd_source_missing_entry(self):
        with pytest.raises(ValueError, match="missing"):
            pipeline.resolve_params(None, ("spd", {"day": "x"}))

    def test_unknown_source(self):
        with pytest.raises(ValueError, match="unknown params source"):
            pipeline.resolve_params(None, ("magic", None))


class TestConfigParsing:
    def test_parse_params_source_forms(self):
        assert pipeline.parse_params_source("preset(mean)") == ("preset", "mean")
        assert pipeline.parse_params_source("entropy(20deg, 30deg)") == (
            "entropy",
            ("20deg", "30deg"),
        )
        assert pipeline.parse_params_source("entropy()") == ("entropy", ())
        kind, paths = pipeline.parse_params_source(
            "spd(day=a.txt, sky=b.txt, qr=r.txt, qg=g.txt, qb=b2.txt)"
        )
        assert kind == "spd"
        assert paths["day"] == "a.txt" and paths["qb"] == "b2.txt"

    def test_parse_params_source_errors(self):
        with pytest.raises(ValueError, match="bad params_source"):
            pipeline.parse_params_source("nonsense")
        with pytest.raises(ValueError, match="unknown params source"):
            pipeline.parse_params_source("magic(x)")
        with pytest.raises(ValueError, match="needs a label"):
            pipeline.parse_params_source("preset()")

    def test_parse_config_text(self):
        text = """
        # settings
        epsilon = 0.2
        kappa = 0.01
        params_source = preset(40deg)
        emit = shadow_free, alpha
        """
        values = pipeline.parse_config_text(text)
        assert values == {
            "epsilon": "0.2",
            "kappa": "0.01",
            "params_source": "preset(40deg)",
            "emit": "shadow_free, alpha",
        }

    def test_parse_config_bad_line(self):
        with pytest.raises(ValueError, match="line 1"):
            pipeline.parse_config_text("epsilon 0.2")
