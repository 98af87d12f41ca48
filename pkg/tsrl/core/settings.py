import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

TSRL_OUT = os.getenv("TSRL_OUT", "runs")
TSRL_LOG_LEVEL = os.getenv("TSRL_LOG_LEVEL", "INFO").upper()


def default_output_root() -> Path:
    # re-read so a CLI invocation sees variables exported after import
    return Path(os.getenv("TSRL_OUT", TSRL_OUT))
