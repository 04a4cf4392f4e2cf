import numpy as np
import pytest

from rainfog import metrics
from rainfog.data import save_image
from rainfog.testkit import naive_ssim, seeded_image


def test_psnr_identical_images_hit_cap():
    x = seeded_image(16, 16, 0)
    assert metrics.psnr(x, x) == 100.0


def test_psnr_uniform_offset_closed_form():
    # an offset of 0.1 in the metric's [0, 1] domain is 0.2 in image units
    x = np.full((16, 16, 3), -0.5, dtype=np.float64)
    y = x + 0.2
    assert metrics.psnr(x, y) == pytest.approx(20.0, abs=1e-6)


def test_psnr_matches_direct_summation():
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, (12, 12, 3))
    y = rng.uniform(-1, 1, (12, 12, 3))
    mse = np.mean((((x + 1) / 2) - ((y + 1) / 2)) ** 2)
    assert metrics.psnr(x, y) == pytest.approx(10 * np.log10(1 / mse), abs=1e-6)


def test_psnr_symmetric_and_shape_checked():
    x, y = seeded_image(16, 16, 2), seeded_image(16, 16, 3)
    assert metrics.psnr(x, y) == metrics.psnr(y, x)
    with pytest.raises(ValueError):
        metrics.psnr(x, y[:8])


def test_psnr_decreases_with_noise_amplitude():
    x = seeded_image(32, 32, 4)
    rng = np.random.default_rng(5)
    noise = rng.uniform(-1, 1, x.shape)
    values = [metrics.psnr(x, np.clip(x + a * noise, -1, 1)) for a in (0.02, 0.05, 0.1, 0.2)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_ssim_self_is_exactly_one():
    x = seeded_image(16, 16, 6)
    assert metrics.ssim(x, x) == 1.0


def test_ssim_negated_structure_below_one():
    x = seeded_image(24, 24, 7)
    assert metrics.ssim(x, -x) < 1.0


def test_ssim_gradient_fixture_matches_naive_reference():
    ys, xs = np.mgrid[0:16, 0:16].astype(np.float64)
    base = ((ys + xs) / 30.0 - 0.5).clip(-1, 1)
    x = np.repeat(base[:, :, None], 3, axis=2)
    y = 0.9 * x
    assert metrics.ssim(x, y) == pytest.approx(naive_ssim(x, y), abs=1e-6)


def test_ssim_random_fixtures_match_naive_reference():
    rng = np.random.default_rng(8)
    for _ in range(5):
        x = rng.uniform(-1, 1, (16, 16, 3))
        y = np.clip(x + rng.normal(0, 0.2, x.shape), -1, 1)
        assert metrics.ssim(x, y) == pytest.approx(naive_ssim(x, y), abs=1e-6)


def test_ssim_symmetric_and_too_small_rejected():
    x, y = seeded_image(16, 16, 9), seeded_image(16, 16, 10)
    assert metrics.ssim(x, y) == pytest.approx(metrics.ssim(y, x), abs=1e-12)
    with pytest.raises(ValueError):
        metrics.ssim(x[:8, :8], y[:8, :8])


def test_ssim_channel_mean_flag():
    x, y = seeded_image(16, 16, 11), seeded_image(16, 16, 12)
    assert metrics.ssim(x, y, channel_mean=True) != metrics.ssim(x, y)


def populate(dirpath, images):
    dirpath.mkdir(parents=True, exist_ok=True)
    for name, img in images.items():
        save_image(img, dirpath / name)


def test_evaluate_dir_identical_directories(tmp_path):
    imgs = {f"{i}.png": seeded_image(16, 16, i) for i in range(2)}
    populate(tmp_path / "a", imgs)
    populate(tmp_path / "b", imgs)
    report = metrics.evaluate_dir(tmp_path / "a", tmp_path / "b")
    assert report.psnr_db == 100.0
    assert report.ssim == 1.0
    assert not report.missing


def test_evaluate_dir_empty_intersection_errors(tmp_path):
    populate(tmp_path / "a", {"x.png": seeded_image(16, 16, 0)})
    populate(tmp_path / "b", {"y.png": seeded_image(16, 16, 1)})
    with pytest.raises(ValueError):
        metrics.evaluate_dir(tmp_path / "a", tmp_path / "b")


def test_evaluate_dir_mean_is_hand_average_and_missing_listed(tmp_path):
    a = {"0.png": seeded_image(16, 16, 0), "1.png": seeded_image(16, 16, 1)}
    b = {
        "0.png": seeded_image(16, 16, 2),
        "1.png": seeded_image(16, 16, 3),
        "extra.png": seeded_image(16, 16, 4),
    }
    populate(tmp_path / "a", a)
    populate(tmp_path / "b", b)
    report = metrics.evaluate_dir(tmp_path / "a", tmp_path / "b")
    assert report.missing == ["extra.png"]
    per_image = [e[1] for e in report.entries]
    assert report.psnr_db == pytest.approx((per_image[0] + per_image[1]) / 2, abs=1e-9)


def test_write_report_layout(tmp_path):
    imgs = {"0.png": seeded_image(16, 16, 0)}
    populate(tmp_path / "a", imgs)
    populate(tmp_path / "b", imgs)
    report = metrics.evaluate_dir(tmp_path / "a", tmp_path / "b")
    out = tmp_path / "report.csv"
    metrics.write_report(report, out)
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "filename,psnr_db,ssim"
    assert lines[1].startswith("0.png,")
    assert lines[-1].startswith("mean,")
