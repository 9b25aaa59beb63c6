import os
import sys
from datetime import timedelta
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("ci", deadline=timedelta(seconds=2))
settings.register_profile("dev", max_examples=25)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))
