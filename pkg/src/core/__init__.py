from src.core.config import settings
from src.core.constants import constants
