"""
One-step problems: the LinUCB special case
==========================================

With a single step the optimistic program has a closed form: each arm's
score is its least-squares estimate plus the radius times its
inverse-Gram norm. The episodic agent and a stand-alone LinUCB learner
therefore make identical choices.
"""

from eleanor import envs
from eleanor.agents import EleanorAgent, MisLinUCBAgent, RadiusConfig
from eleanor.harness import parse_config, run_experiment
from eleanor.streams import rng_stream

env = envs.make_hard_bandit(2, eps=0.3, gap=0.2)
cfg = RadiusConfig(sigma_noise=0.5, ibe_term=0.3)
episodic, bandit = EleanorAgent(env, cfg, 200), MisLinUCBAgent(env, cfg, 200)
agree = 0
for k in range(1, 201):
    episodic.begin_episode(k)
    bandit.begin_episode(k)
    a = episodic.act(1, 0)
    agree += a == bandit.act(1, 0)
    x = envs.sample_step(env, 1, 0, a, rng_stream(0, k))
    episodic.observe(x)
    bandit.observe(x)
print(f"identical choices in {agree}/200 rounds")

###############################################################################
# Under misspecification the radius can carry an extra term growing like
# eps * sqrt(d k). Whether that helps depends on the instance; here the arm
# that breaks linearity is close in value to the best linear arm.

for ibe in (0.0, 0.3):
    doc = {
        "env": {"name": "hard_bandit", "params": {"d": 2, "eps": 0.3, "gap": 0.2}},
        "agent": {"name": "mislinucb", "radius": {"sigma_noise": 0.5, "ibe_term": ibe}},
        "episodes": 2000,
        "seeds": [0, 1, 2, 3],
    }
    finals = [c.cumulative[-1] for c in run_experiment(parse_config(doc))]
    print(f"ibe_term={ibe}: mean cumulative regret {sum(finals) / len(finals):.1f}")
