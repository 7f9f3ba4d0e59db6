from .describe import describe
from .list_scenarios import list_scenarios_command
from .run import run
