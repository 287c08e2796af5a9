from .bc import InsufficientData, behavior_clone
from .buffer import RolloutBuffer, compute_gae
from .config import TrainConfig
from .finetune import ai_led_finetune
from .loops import train_agent_agent, train_fcp
from .policies import DenseAgent, DensePolicy, IdctAgent
from .ppo import NonFiniteLoss, collect_rollouts, ppo_update
from .rollout import applicable_mask, evaluate, run_episode
