"""
Logging Configuration
"""

import logging
from typing import Optional

from config.sim_config import SimConfig

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: Optional[str] = None) -> None:
    """Install the root handler once; later calls only adjust the level"""
    level_name = (level or SimConfig.LOG_LEVEL).upper()
    logging.basicConfig(level=level_name, format=LOG_FORMAT)
    logging.getLogger().setLevel(level_name)
