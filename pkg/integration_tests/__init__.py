import os

import homoglab

JOBS = int(os.environ.get("HOMOGLAB_JOBS", "1"))

print(f"\nAcceptance runs with homoglab {homoglab.__version__}:\n    {homoglab.Settings(jobs=JOBS)}\n")
