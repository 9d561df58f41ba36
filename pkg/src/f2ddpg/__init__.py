"""Friend-or-foe multi-agent deep deterministic policy gradient framework.

A self-contained numpy implementation of centralized-critic actor-critic
training where the other agents' actions are biased one normalized critic
gradient step (up for allies, down for enemies) before critic targets and
policy gradients are evaluated, together with its baseline variants and four
particle-world scenarios.
"""

from .config import ConfigError, RunConfig, parse_config, serialize_config
from .env import (EntityState, EnvAction, Physics, StepResult, WorldState,
                  decode_action, detect_collisions, observe, reset, step)
from .marl import (AgentLearner, BiasConfig, BiasVariant, JointLayout, TeamSpec,
                   TrainConfig, actor_update, bias_joint_actions, critic_input,
                   critic_target, critic_update, make_learners, select_action,
                   train, train_episode, variants_for)
from .metrics import (EvalReport, SimilaritySample, bias_alignment_series,
                      capture_stats, cosine_similarity, evaluate)
from .nn import (AdamState, ForwardTrace, GradientBundle, MlpParams, adam_step,
                 mlp_backward, mlp_forward, soft_update, xavier_uniform_init)
from .replay import Minibatch, ReplayBuffer, Transition
from .scenarios import (Scenario, make_scenario, reward_cooperative_communication,
                        reward_cooperative_navigation, reward_covert_communication,
                        reward_predator_prey)

__version__ = "0.1.0"
