"""
Self-Deployment Configuration Settings
"""

import os
from pathlib import Path
from typing import Dict, Any

from dotenv import load_dotenv

load_dotenv()

CONFIG_DIR = Path(__file__).resolve().parent


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


class SimConfig:
    """Simulation and agent configuration class"""

    # Case-based reasoning
    MAX_MATCH = _env_float('CBR_MAX_MATCH', 2.0)
    MIN_FITNESS = _env_float('CBR_MIN_FITNESS', 0.8)
    DEMAND_NORMALIZER_MBPS = _env_float('CBR_DEMAND_NORMALIZER_MBPS', 100.0)
    USER_SLOTS = _env_int('CBR_USER_SLOTS', 4)

    # MAC surrogate
    HIDDEN_NODE_PENALTY = _env_float('MAC_HIDDEN_NODE_PENALTY', 0.6)
    HIDDEN_LOSS_CAP = _env_float('MAC_HIDDEN_LOSS_CAP', 0.9)

    # RF model
    DISTANCE_CLAMP_M = _env_float('RF_DISTANCE_CLAMP_M', 0.1)
    SNR_CAP_DB = _env_float('RF_SNR_CAP_DB', 60.0)
    MCS_TABLE_PATH = os.getenv('MCS_TABLE_PATH', str(CONFIG_DIR / 'mcs_default.yaml'))

    # Learning and exploration
    CORRIDOR_HALF_WIDTH = _env_float('LEARN_CORRIDOR_HALF_WIDTH', 2.0)  # grid units
    OMEGA_INITIAL = _env_float('LEARN_OMEGA_INITIAL', 0.5)
    OMEGA_MIN = _env_float('LEARN_OMEGA_MIN', 0.1)
    OMEGA_MAX = _env_float('LEARN_OMEGA_MAX', 1.0)
    EXPLORE_DISTANCE_FLOOR_M = _env_float('EXPLORE_DISTANCE_FLOOR_M', 1.0)

    # Episode driver
    CONVERGENCE_TOLERANCE = _env_float('EPISODE_CONVERGENCE_TOLERANCE', 0.01)
    CONVERGENCE_WINDOW = _env_int('EPISODE_CONVERGENCE_WINDOW', 3)
    MAX_REQUESTS = _env_int('EPISODE_MAX_REQUESTS', 20)
    ORACLE_COMBINATION_LIMIT = _env_int('ORACLE_COMBINATION_LIMIT', 10_000_000)

    # Reporting
    THROUGHPUT_FLOOR_MBPS = _env_float('REPORT_THROUGHPUT_FLOOR_MBPS', 60.0)
    CAMPAIGN_WORKERS = _env_int('CAMPAIGN_WORKERS', 1)
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    @classmethod
    def get_decision_config(cls) -> Dict[str, Any]:
        """Get decision-making thresholds"""
        return {
            'max_match': cls.MAX_MATCH,
            'min_fitness': cls.MIN_FITNESS,
        }

    @classmethod
    def get_mac_config(cls) -> Dict[str, Any]:
        """Get MAC surrogate parameters"""
        return {
            'hidden_penalty': cls.HIDDEN_NODE_PENALTY,
            'hidden_cap': cls.HIDDEN_LOSS_CAP,
        }

    @classmethod
    def get_learning_config(cls) -> Dict[str, Any]:
        """Get throughput-learning and exploration parameters"""
        return {
            'corridor_half_width': cls.CORRIDOR_HALF_WIDTH,
            'omega_initial': cls.OMEGA_INITIAL,
            'omega_min': cls.OMEGA_MIN,
            'omega_max': cls.OMEGA_MAX,
            'distance_floor_m': cls.EXPLORE_DISTANCE_FLOOR_M,
        }

    @classmethod
    def get_episode_config(cls) -> Dict[str, Any]:
        """Get episode-driver parameters"""
        return {
            'convergence_tolerance': cls.CONVERGENCE_TOLERANCE,
            'convergence_window': cls.CONVERGENCE_WINDOW,
            'max_requests': cls.MAX_REQUESTS,
        }
