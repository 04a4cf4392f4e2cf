import numpy as np
import pytest
import torch

from rainfog import testkit
from rainfog.losses import cycle_loss
from rainfog.networks import DerainGenerator


def test_finite_diff_quadratic():
    x = torch.ones(4)
    grad = testkit.finite_diff_grad(lambda t: float((t**2).sum()), x)
    assert torch.allclose(grad, torch.full((4,), 2.0, dtype=torch.float64), atol=1e-6)


def test_finite_diff_linear_exact_for_any_h():
    x = torch.tensor([1.0, -2.0, 3.0])
    w = torch.tensor([0.5, 1.5, -2.5])
    for h in (1e-2, 1e-3, 1e-4):
        grad = testkit.finite_diff_grad(lambda t: float((w * t).sum()), x, h=h)
        assert torch.allclose(grad, w.double(), atol=1e-9)


def test_finite_diff_rejects_non_finite():
    x = torch.zeros(2)
    with pytest.raises(ValueError):
        testkit.finite_diff_grad(lambda t: float(1.0 / t.sum()), x)


def test_finite_diff_agrees_with_autograd_on_cycle_loss():
    torch.manual_seed(0)
    x = torch.randn(4, 4, dtype=torch.float64)
    target = torch.randn(4, 4, dtype=torch.float64)
    leaf = x.clone().requires_grad_(True)
    cycle_loss(leaf, target, mode="l2").backward()
    numeric = testkit.finite_diff_grad(lambda t: float(cycle_loss(t, target, mode="l2")), x)
    rel = (numeric - leaf.grad).norm() / leaf.grad.norm()
    assert rel < 1e-4


def test_count_params_single_conv():
    conv = torch.nn.Conv2d(3, 64, 3)
    assert testkit.count_params(conv) == 3 * 3 * 3 * 64 + 64


def test_count_params_empty_and_mapping():
    assert testkit.count_params([]) == 0
    assert testkit.count_params({"a": np.zeros((2, 3)), "b": torch.zeros(5)}) == 11


def test_count_params_module_matches_state_dict_walk():
    torch.manual_seed(0)
    net = DerainGenerator(residual_blocks=2)
    assert testkit.count_params(net) == testkit.count_params(net.state_dict())


def test_naive_ssim_self_and_constant_offset_closed_form():
    x = testkit.seeded_image(16, 16, 0)
    assert testkit.naive_ssim(x, x) == pytest.approx(1.0, abs=1e-12)

    # constant planes: variance terms vanish, SSIM reduces to the mean term
    a = np.full((16, 16, 3), 0.0)
    delta = 0.2
    b = a + delta
    mu_a = 0.5  # after [0,1] remap
    mu_b = 0.6
    c1 = 0.01**2
    expected = (2 * mu_a * mu_b + c1) / (mu_a**2 + mu_b**2 + c1)
    assert testkit.naive_ssim(a, b) == pytest.approx(expected, abs=1e-9)


def test_seeded_fixtures_are_deterministic():
    assert np.array_equal(testkit.seeded_image(8, 8, 3), testkit.seeded_image(8, 8, 3))
    assert torch.equal(testkit.seeded_tensor((2, 3), 4), testkit.seeded_tensor((2, 3), 4))
