"""Generative-model plugins: diffusion, adversarial critic, VAEs, attention, stacks."""

import numpy as np
import pytest
from scipy import stats

from gairlab.env import EnvConfig, RelayEnv
from gairlab.errors import ConfigurationError, NumericError, UsageError
from gairlab.nn import Tensor, backward, grad_check, zero_grads
from gairlab.nn.optim import Adam
from gairlab.plugins import (
    DiffusionPolicy,
    EnhancementStack,
    HybridLatentModel,
    LeastSquaresValueAdversary,
    NoiseSchedule,
    TokenEncoder,
    TransformerDenoiser,
    VaeModel,
    VaeStateEncoder,
    actions_to_chain_targets,
    compose_agent,
    normalized_mse,
)
from gairlab.rl import Td3Agent, Td3Config, agent_space_for, train_loop
from gairlab.rl.spaces import AgentSpace
from gairlab.seeding import SeedBank


def tiny_td3(**overrides) -> Td3Config:
    defaults = dict(batch_size=8, hidden_sizes=(16, 16), buffer_capacity=500, warmup_steps=20)
    defaults.update(overrides)
    return Td3Config(**defaults)


def tiny_env(kind="continuous", **overrides) -> EnvConfig:
    defaults = dict(antenna_count=8, episode_steps=10, action_space=kind)
    defaults.update(overrides)
    return EnvConfig(**defaults)


def fill_buffer(agent: Td3Agent, cfg: EnvConfig, n=40, seed=3):
    env = RelayEnv(cfg)
    obs = env.reset(seed)
    for _ in range(n):
        a = agent.random_action()
        res = env.step(agent.to_env_action(a, obs))
        nxt = res.state.observe(cfg)
        aux = None
        if agent.wants_aux:
            aux = np.array(
                [
                    2.0 * res.state.bs_power / cfg.bs_power_max - 1.0,
                    2.0 * res.state.uav_power / cfg.uav_power_max - 1.0,
                ]
            )
        agent.record(obs, a, res.reward, nxt, res.done, aux=aux)
        obs = nxt if not res.done else env.reset(seed + 1)


# -- noise schedule ------------------------------------------------------------


def test_schedule_validation():
    with pytest.raises(ConfigurationError):
        NoiseSchedule(np.array([]))
    with pytest.raises(ConfigurationError):
        NoiseSchedule.linear(0)
    with pytest.raises(ConfigurationError):
        NoiseSchedule(np.array([0.5, 1.0]))
    sched = NoiseSchedule.linear(5)
    assert sched.steps == 5
    assert (np.diff(sched.alpha_bars) < 0).all()
    assert sched.at(1)[0] == pytest.approx(1e-4)
    assert sched.at(5)[0] == pytest.approx(0.1)


def test_forward_marginal_is_standard_normal_when_alpha_bar_vanishes():
    sched = NoiseSchedule.linear(400, 1e-4, 0.05)
    assert sched.alpha_bars[-1] < 1e-3
    rng = np.random.default_rng(0)
    a = np.array([0.7, -0.3])
    eps = rng.standard_normal((100_000, 2))
    draws = sched.forward_marginal(np.tile(a, (100_000, 1)), eps, np.full(100_000, 400))
    assert np.abs(draws.mean(axis=0)).max() < 0.05
    assert ((draws.var(axis=0) > 0.9) & (draws.var(axis=0) < 1.1)).all()


# -- diffusion policy ------------------------------------------------------------


def make_gdm_policy(kind="continuous", seed=0, **kwargs) -> tuple[DiffusionPolicy, AgentSpace, int]:
    cfg = tiny_env(kind)
    space = agent_space_for(cfg)
    bank = SeedBank(seed)
    policy = DiffusionPolicy(cfg.obs_dim, space, tiny_td3(), bank, hidden_sizes=(16, 16), **kwargs)
    return policy, space, cfg.obs_dim


def zero_last_layer(net):
    last = net.n_layers - 1
    net.params[f"{net.prefix}.W{last}"].data[:] = 0.0
    net.params[f"{net.prefix}.b{last}"].data[:] = 0.0


def test_single_step_chain_with_zero_denoiser_is_scaled_noise():
    policy, _, obs_dim = make_gdm_policy(schedule=NoiseSchedule.linear(1, beta_end=0.1))
    zero_last_layer(policy.denoiser.net)
    obs = np.zeros((1, obs_dim))
    head = policy.sample_head_np(obs, np.random.default_rng(5))
    x1 = np.random.default_rng(5).standard_normal((1, policy.chain_dim))
    expected = np.tanh(x1 / np.sqrt(1.0 - 0.1))
    np.testing.assert_allclose(head, expected, rtol=1e-12)


def test_chain_outputs_always_inside_open_unit_box():
    policy, _, obs_dim = make_gdm_policy()
    rng = np.random.default_rng(1)
    obs = rng.standard_normal((64, obs_dim))
    head = policy.sample_head_np(obs, rng)
    assert (np.abs(head) < 1.0).all()


def test_policy_loss_zero_with_zero_critics_and_no_regularizer():
    cfg = tiny_env("continuous")
    space = agent_space_for(cfg)
    agent = Td3Agent(
        cfg.obs_dim,
        space,
        tiny_td3(),
        seed=2,
        total_steps=100,
        policy_factory=lambda a: DiffusionPolicy(
            a.obs_dim, a.space, a.td3, a.bank, eta=0.0, hidden_sizes=(16, 16)
        ),
    )
    zero_last_layer(agent.critic.net1)
    zero_last_layer(agent.critic.net2)
    fill_buffer(agent, cfg)
    batch = agent.buffer.sample(8, np.random.default_rng(0))
    before = {k: v.data.copy() for k, v in agent.policy.params.items()}
    loss = agent.policy.update(agent.critic, batch.states, batch)
    assert loss == 0.0
    for k, v in agent.policy.params.items():
        np.testing.assert_array_equal(v.data, before[k])  # zero gradient everywhere


def test_perfect_denoiser_gives_zero_penalty(monkeypatch):
    policy, space, obs_dim = make_gdm_policy(seed=9)
    b = 6
    obs = np.zeros((b, obs_dim))
    actions = np.random.default_rng(0).uniform(-1, 1, size=(b, space.action_dim))
    # replay the policy's training stream to know the (k, eps) it will draw
    replay = SeedBank(9).generator("gdm-train")
    replay.integers(1, policy.schedule.steps + 1, size=b)
    eps = replay.standard_normal((b, policy.chain_dim))
    monkeypatch.setattr(
        policy.denoiser, "forward", lambda params, x_t, o, kf: Tensor(eps.copy())
    )
    penalty = policy._denoising_penalty(obs, actions)
    assert float(penalty.data) == 0.0


def test_chain_gradient_matches_finite_differences():
    space = AgentSpace("continuous", head_dim=2, action_dim=2, critic_repr_dim=2)
    bank = SeedBank(3)
    policy = DiffusionPolicy(3, space, tiny_td3(), bank, hidden_sizes=(6,))
    rng = np.random.default_rng(7)
    obs = rng.standard_normal((2, 3))
    x_init, z = policy.draw_chain_noise(2, rng)

    def loss_fn():
        x0 = policy.chain_graph(policy.params, obs, x_init, z)
        a = np.tanh(0.3)  # fixed linear readout keeps the loss scalar
        return (x0 * a).sum()

    assert grad_check(loss_fn, policy.params, epsilon=1e-6) < 1e-4


@pytest.mark.parametrize("kind", ["continuous", "discrete", "hybrid"])
def test_gdm_actions_respect_space_bounds(kind):
    policy, space, obs_dim = make_gdm_policy(kind)
    rng = np.random.default_rng(4)
    for i in range(50):
        a = policy.act(rng.standard_normal(obs_dim), "train", epsilon=0.0)
        if kind == "continuous":
            assert (np.abs(a) < 1.0).all()
        elif kind == "discrete":
            assert a.shape == (1,) and 0 <= int(a[0]) < space.n_actions
        else:
            assert 0 <= int(a[0]) < space.n_moves
            assert (np.abs(a[1:]) < 1.0).all()


def test_stored_action_chain_targets():
    cfg = tiny_env("discrete", power_levels=2)
    space = agent_space_for(cfg)
    # index 13 = move 3, bs level 0, uav level 1 for 2x2 levels
    enc = actions_to_chain_targets(space, np.array([[13.0]]))
    expected = np.full(9, -0.9)
    expected[3] = 0.9  # move block
    expected[5 + 0] = 0.9  # bs-level block
    expected[7 + 1] = 0.9  # uav-level block
    np.testing.assert_allclose(enc[0], expected)
    hyb = agent_space_for(tiny_env("hybrid"))
    enc2 = actions_to_chain_targets(hyb, np.array([[2.0, 0.5, -0.25]]))
    np.testing.assert_allclose(enc2[0], [-0.9, -0.9, 0.9, -0.9, -0.9, 0.5, -0.25])


def test_reverse_chain_mean_approaches_data_mean():
    """A denoiser trained on synthetic 2-D actions pulls samples toward them."""
    space = AgentSpace("continuous", head_dim=2, action_dim=2, critic_repr_dim=2)
    bank = SeedBank(11)
    policy = DiffusionPolicy(
        1, space, tiny_td3(actor_lr=3e-3), bank, hidden_sizes=(32, 32)
    )
    data_rng = np.random.default_rng(0)
    data_mean = np.array([0.5, -0.4])
    data = data_mean + 0.1 * data_rng.standard_normal((512, 2))
    obs = np.zeros((64, 1))

    def w1_to_data() -> float:
        samples = policy.chain_np(policy.params, np.zeros((10_000, 1)), np.random.default_rng(42))
        return sum(
            stats.wasserstein_distance(samples[:, j], data[:, j]) for j in range(2)
        )

    distances = [w1_to_data()]
    opt = policy.opt
    for step in range(600):
        idx = data_rng.integers(0, 512, size=64)
        zero_grads(policy.params.values())
        loss = policy._denoising_penalty(obs, data[idx])
        backward(loss)
        opt.step()
        if step in (299, 599):
            distances.append(w1_to_data())
    assert distances[0] > distances[1] > distances[2]
    assert distances[2] < 0.25 * distances[0]


# -- adversarial critic -----------------------------------------------------------


def test_disc_and_adv_losses_at_symmetric_point():
    cfg = tiny_env("continuous")
    space = agent_space_for(cfg)
    agent = Td3Agent(cfg.obs_dim, space, tiny_td3(), seed=5, total_steps=100)
    adversary = LeastSquaresValueAdversary(
        cfg.obs_dim, space, tiny_td3(), SeedBank(5), hidden_sizes=(16, 16), lr=0.0
    )
    zero_last_layer(adversary.disc)  # sigmoid(0) = 0.5 for every input
    # make the twins identical so one target vector can fit both exactly
    for name, p in agent.critic.params1.items():
        agent.critic.params2[name.replace("critic1", "critic2")].data = p.data.copy()
    fill_buffer(agent, cfg)
    batch = agent.buffer.sample(8, np.random.default_rng(1))
    rep = adversary.action_repr(batch.actions)
    q = agent.critic.q_np(agent.critic.params1, agent.critic.net1, batch.states, rep)
    metrics = adversary(agent.critic, batch.states, batch.actions, q)
    assert metrics["disc_loss"] == pytest.approx(0.5, abs=1e-15)
    assert metrics["adv_q_loss"] == pytest.approx(0.25, abs=1e-15)
    assert metrics["critic1_loss"] == pytest.approx(0.0, abs=1e-20)
    assert metrics["critic2_loss"] == pytest.approx(0.0, abs=1e-20)


def test_adversary_losses_are_nonnegative():
    cfg = tiny_env("continuous")
    space = agent_space_for(cfg)
    adversary = LeastSquaresValueAdversary(cfg.obs_dim, space, tiny_td3(), SeedBank(6))
    agent = Td3Agent(cfg.obs_dim, space, tiny_td3(), seed=6, total_steps=100)
    fill_buffer(agent, cfg)
    for sample_seed in range(5):
        batch = agent.buffer.sample(8, np.random.default_rng(sample_seed))
        targets = agent.compute_targets(batch, batch.next_states)
        metrics = adversary(agent.critic, batch.states, batch.actions, targets)
        assert metrics["disc_loss"] >= 0.0
        assert metrics["adv_q_loss"] >= 0.0
        assert metrics["critic1_loss"] >= 0.0


def test_zero_adversarial_weight_matches_vanilla_bitwise():
    def run(with_gan: bool):
        cfg = tiny_env("continuous")
        space = agent_space_for(cfg)
        updater = None
        if with_gan:
            updater = LeastSquaresValueAdversary(
                cfg.obs_dim, space, tiny_td3(), SeedBank(8), lambda_adv=0.0
            )
        agent = Td3Agent(
            cfg.obs_dim, space, tiny_td3(), seed=8, total_steps=200, critic_updater=updater
        )
        fill_buffer(agent, cfg, n=60, seed=12)
        for _ in range(9):
            agent.update()
        return agent

    vanilla, gan = run(False), run(True)
    for name, p in vanilla.critic.named_params().items():
        np.testing.assert_array_equal(p.data, gan.critic.named_params()[name].data)
    for name, p in vanilla.policy.named_params().items():
        np.testing.assert_array_equal(p.data, gan.policy.named_params()[name].data)


def test_adversary_works_with_discrete_head_critics():
    cfg = tiny_env("discrete")
    space = agent_space_for(cfg)
    updater = LeastSquaresValueAdversary(cfg.obs_dim, space, tiny_td3(), SeedBank(9))
    agent = Td3Agent(
        cfg.obs_dim, space, tiny_td3(), seed=9, total_steps=100, critic_updater=updater
    )
    fill_buffer(agent, cfg)
    for _ in range(4):
        metrics = agent.update()
    assert np.isfinite(metrics["disc_loss"])
    assert np.isfinite(metrics["critic1_loss"])


def test_adversary_rejects_negative_weights():
    cfg = tiny_env("continuous")
    space = agent_space_for(cfg)
    with pytest.raises(ConfigurationError):
        LeastSquaresValueAdversary(cfg.obs_dim, space, tiny_td3(), SeedBank(0), lambda_adv=-0.1)


# -- state-compression VAE ---------------------------------------------------------


def test_vae_rejects_latent_not_smaller_than_state():
    with pytest.raises(ConfigurationError):
        VaeModel(8, 8)
    with pytest.raises(ConfigurationError):
        VaeModel(8, 9)


def test_deterministic_encoding_is_posterior_mean():
    model = VaeModel(12, 4, seed=3)
    states = np.random.default_rng(0).standard_normal((5, 12))
    mu, _ = model.encode_np(states)
    enc = VaeStateEncoder(model, SeedBank(3))
    np.testing.assert_array_equal(enc.encode_np(states), mu)
    # single-row encoding matches its own call shape exactly (BLAS may
    # round 1-row and 5-row products differently at the last ulp)
    np.testing.assert_array_equal(enc.encode_np(states[0]), model.encode_np(states[:1])[0][0])
    np.testing.assert_allclose(enc.encode_np(states[0]), mu[0], rtol=1e-12)
    # identical states encode identically
    np.testing.assert_array_equal(
        model.encode_np(np.stack([states[0], states[0]]))[0][0],
        model.encode_np(np.stack([states[0], states[0]]))[0][1],
    )


def test_reparameterized_sample_moments():
    model = VaeModel(6, 2, seed=1)
    state = np.random.default_rng(2).standard_normal((1, 6))
    mu, logvar = model.encode_np(state)
    rng = np.random.default_rng(3)
    _, _, z = model.sample_np(np.tile(state, (100_000, 1)), rng)
    sigma = np.exp(0.5 * logvar)[0]
    assert (np.abs(z.mean(axis=0) - mu[0]) < 0.03 * sigma).all()
    assert (np.abs(z.var(axis=0) / np.exp(logvar)[0] - 1.0) < 0.03).all()


def test_kl_closed_forms():
    model = VaeModel(2, 1, hidden_sizes=(4,), seed=0)
    zero_last_layer(model.encoder)  # mu = 0, logvar = 0 for any input
    states = np.random.default_rng(1).standard_normal((3, 2))
    _, _, kl = model.loss_graph(states, np.zeros((3, 1)))
    assert float(kl.data) == 0.0
    # now force mu = 1, logvar = 0: kl = 0.5 * (1 + 1 - 1 - 0) = 0.5
    model.encoder.params["vae-enc.b1"].data[:] = np.array([1.0, 0.0])
    _, _, kl = model.loss_graph(states, np.zeros((3, 1)))
    assert float(kl.data) == pytest.approx(0.5, abs=1e-15)


def test_perfect_reconstruction_zero_error():
    model = VaeModel(3, 1, hidden_sizes=(4,), seed=2)
    zero_last_layer(model.encoder)
    zero_last_layer(model.decoder)
    target = np.array([0.3, -0.7, 1.1])
    model.decoder.params["vae-dec.b1"].data[:] = target
    states = np.tile(target, (4, 1))
    _, recon, _ = model.loss_graph(states, np.zeros((4, 1)))
    assert float(recon.data) == 0.0


def test_vae_train_step_reduces_loss_on_fixed_batch():
    model = VaeModel(10, 3, beta_kl=0.05, seed=4)
    enc = VaeStateEncoder(model, SeedBank(4), lr=3e-3)
    states = np.random.default_rng(5).standard_normal((64, 10))
    first = enc.train_step(states)["vae_loss"]
    for _ in range(200):
        last = enc.train_step(states)["vae_loss"]
    assert last < first


def test_normalized_mse_endpoints():
    data = np.random.default_rng(6).standard_normal((20, 4))
    assert normalized_mse(data, data) == 0.0
    with pytest.raises(NumericError):
        normalized_mse(np.ones((5, 2)), np.zeros((5, 2)))


# -- hybrid-action latent -----------------------------------------------------------


def test_hybrid_decode_bounds_determinism_and_range_check():
    model = HybridLatentModel(6, seed=1)
    rng = np.random.default_rng(0)
    s, z = rng.standard_normal((4, 6)), rng.standard_normal((4, 4))
    p1 = model.decode_np(s, [0, 1, 2, 3], z)
    p2 = model.decode_np(s, [0, 1, 2, 3], z)
    assert p1.shape == (4, 2)
    assert (np.abs(p1) < 1.0).all()
    np.testing.assert_array_equal(p1, p2)
    with pytest.raises(UsageError):
        model.decode_np(s[:1], [5], z[:1])
    with pytest.raises(UsageError):
        model.decode_np(s[:1], [-1], z[:1])


def test_hybrid_latent_reconstructs_three_mode_dataset():
    """Each move pairs with its own power point; the cVAE must separate them."""
    model = HybridLatentModel(4, z_dim=2, beta_kl=0.02, hidden_sizes=(32, 32), seed=7)
    opt = Adam(model.params, lr=3e-3)
    rng = np.random.default_rng(8)
    powers_by_move = np.array([[-0.8, 0.5], [0.2, -0.3], [0.7, 0.9]])
    states = rng.standard_normal((600, 4)) * 0.3
    moves = rng.integers(0, 3, size=600)
    powers = powers_by_move[moves] + 0.02 * rng.standard_normal((600, 2))
    for _ in range(900):
        idx = rng.integers(0, 600, size=64)
        eps = rng.standard_normal((64, 2))
        zero_grads(model.params.values())
        total, _, _ = model.loss_graph(states[idx], moves[idx], powers[idx], eps)
        backward(total)
        opt.step()
    mu, _ = model.encode_np(states[:200], moves[:200], powers[:200])
    decoded = model.decode_np(states[:200], moves[:200], mu)
    err = np.abs(decoded - powers_by_move[moves[:200]]).max()
    assert err < 0.1


# -- attention networks ---------------------------------------------------------------


def test_token_encoder_entity_vs_chunk_layout():
    bank = SeedBank(0)
    entity = TokenEncoder(2 * 8 + 7, 4, bank, antenna_count=8, model_dim=16)
    assert entity.layout.antenna_count == 8
    assert entity.layout.n_tokens == 3 + 8
    chunk = TokenEncoder(16, 4, SeedBank(1), antenna_count=8, model_dim=16)
    assert chunk.layout.antenna_count == 0
    assert chunk.layout.n_tokens == 4
    x = np.random.default_rng(2).standard_normal((3, 16))
    assert chunk.forward_np(chunk.params, x).shape == (3, 4)


def test_antenna_token_permutation_invariance():
    n = 8
    enc = TokenEncoder(2 * n + 7, 4, SeedBank(2), antenna_count=n, model_dim=16)
    rng = np.random.default_rng(3)
    x = rng.standard_normal(2 * n + 7)
    perm = rng.permutation(n)
    x_perm = x.copy()
    pairs = x[7:].reshape(n, 2)
    x_perm[7:] = pairs[perm].reshape(-1)
    out = enc.forward_np(enc.params, x[None])
    out_perm = enc.forward_np(enc.params, x_perm[None])
    np.testing.assert_allclose(out, out_perm, atol=1e-12)
    # but permuting non-antenna entries does change the output
    x_swapped = x.copy()
    x_swapped[[0, 2]] = x_swapped[[2, 0]]
    assert not np.allclose(out, enc.forward_np(enc.params, x_swapped[None]))


def test_token_encoder_graph_matches_numpy_and_gradients():
    enc = TokenEncoder(11, 3, SeedBank(4), model_dim=8, heads=2, blocks=2)
    x = np.random.default_rng(5).standard_normal((2, 11))
    graph_out = enc.forward(enc.params, Tensor(x))
    np.testing.assert_array_equal(graph_out.data, enc.forward_np(enc.params, x))

    def loss_fn():
        return (enc.forward(enc.params, Tensor(x)) * 0.7).sum()

    assert grad_check(loss_fn, enc.params, epsilon=1e-6) < 1e-4


def test_transformer_denoiser_shapes_and_duality():
    den = TransformerDenoiser(9, 4, 5, SeedBank(6), model_dim=8, heads=2, blocks=1)
    rng = np.random.default_rng(7)
    x, obs = rng.standard_normal((3, 4)), rng.standard_normal((3, 9))
    k_feat = np.zeros((3, 5))
    k_feat[:, 2] = 1.0
    out_np = den.forward_np(den.params, x, obs, k_feat)
    out_graph = den.forward(den.params, Tensor(x), obs, k_feat)
    assert out_np.shape == (3, 4)
    np.testing.assert_array_equal(out_graph.data, out_np)


def test_diffusion_with_transformer_denoiser_runs():
    cfg = tiny_env("continuous")
    space = agent_space_for(cfg)
    agent = Td3Agent(
        cfg.obs_dim,
        space,
        tiny_td3(),
        seed=13,
        total_steps=100,
        policy_factory=lambda a: DiffusionPolicy(
            a.obs_dim,
            a.space,
            a.td3,
            a.bank,
            denoiser_factory=lambda o, c, k, b: TransformerDenoiser(
                o, c, k, b, antenna_count=cfg.antenna_count, model_dim=8, heads=2, blocks=1
            ),
        ),
    )
    fill_buffer(agent, cfg)
    for _ in range(4):
        metrics = agent.update()
    assert np.isfinite(metrics.get("actor_loss", np.nan)) or agent.actor_updates == 2


# -- enhancement stacks -----------------------------------------------------------------


def test_stack_exclusivity_rules():
    with pytest.raises(ConfigurationError):
        EnhancementStack(gdm_policy=True, transformer_actor=True)
    with pytest.raises(ConfigurationError):
        EnhancementStack(transformer_denoiser=True)
    with pytest.raises(ConfigurationError):
        EnhancementStack(vae_hybrid_action=True).validate_for_space("continuous")
    EnhancementStack(vae_hybrid_action=True).validate_for_space("hybrid")


def test_stack_serialization_round_trip_and_unknown_keys():
    stack = EnhancementStack(gdm_policy=True, gan_critic=True, gdm_eta=0.1)
    assert EnhancementStack.from_dict(stack.to_dict()) == stack
    assert stack.label() == "gdm+gan"
    assert EnhancementStack().label() == "vanilla"
    with pytest.raises(ConfigurationError):
        EnhancementStack.from_dict({"gdm_policy": True, "mystery": 1})


def test_empty_stack_composes_to_vanilla_bitwise():
    cfg = tiny_env("continuous")

    def run(agent):
        return train_loop(RelayEnv(cfg), agent, episodes=4, bank=SeedBank(21))

    direct = run(Td3Agent(cfg.obs_dim, agent_space_for(cfg), tiny_td3(), seed=21, total_steps=40))
    composed = run(compose_agent(cfg, EnhancementStack(), tiny_td3(), seed=21, total_steps=40))
    assert [r.reward for r in direct.episodes] == [r.reward for r in composed.episodes]
    assert [r.mean_rate for r in direct.episodes] == [r.mean_rate for r in composed.episodes]


def test_vae_state_rewires_input_dims():
    cfg = tiny_env("continuous")
    stack = EnhancementStack(vae_state=True, vae_latent_dim=16)
    agent = compose_agent(cfg, stack, tiny_td3(), seed=22, total_steps=40)
    assert agent.obs_dim == 16
    assert agent.raw_obs_dim == cfg.obs_dim
    assert agent.critic.net1.dims[0] == 16 + 4  # latent + action repr
    fill_buffer(agent, cfg)
    metrics = agent.update()
    assert "vae_loss" in metrics and np.isfinite(metrics["vae_loss"])


def test_full_stack_runs_in_continuous_space():
    cfg = tiny_env("continuous")
    stack = EnhancementStack(
        gdm_policy=True,
        gan_critic=True,
        transformer_denoiser=True,
        vae_state=True,
        vae_latent_dim=8,
        attention_dim=8,
    )
    agent = compose_agent(cfg, stack, tiny_td3(), seed=23, total_steps=60)
    fill_buffer(agent, cfg)
    for _ in range(4):
        metrics = agent.update()
    assert np.isfinite(metrics["critic1_loss"])
    assert np.isfinite(metrics["disc_loss"])


def test_hybrid_latent_stack_runs_end_to_end():
    cfg = tiny_env("hybrid")
    stack = EnhancementStack(vae_hybrid_action=True)
    agent = compose_agent(cfg, stack, tiny_td3(), seed=24, total_steps=60)
    assert agent.space.param_dim == stack.hybrid_z_dim
    result = train_loop(RelayEnv(cfg), agent, episodes=4, bank=SeedBank(24))
    assert len(result.episodes) == 4
    assert agent.critic_updates > 0


def test_checkpoint_names_cover_all_plugins():
    cfg = tiny_env("continuous")
    stack = EnhancementStack(gdm_policy=True, gan_critic=True, vae_state=True, vae_latent_dim=8)
    agent = compose_agent(cfg, stack, tiny_td3(), seed=25, total_steps=40)
    names = set(agent.named_params())
    assert any(n.startswith("policy/denoiser") for n in names)
    assert any(n.startswith("critic/critic1") for n in names)
    assert any(n.startswith("encoder/vae-enc") for n in names)
    assert any(n.startswith("value-adversary/disc") for n in names)
