import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    """Base configuration; every value can be set in the environment or a .env file."""
    THREADS = int(os.getenv('MAMID_THREADS', 1))
    SEED = int(os.getenv('MAMID_SEED', 0))
    OUTPUT_DIR = os.getenv('MAMID_OUTPUT_DIR', 'runs')
    LOG_LEVEL = os.getenv('MAMID_LOG_LEVEL', 'INFO')

    # subset study
    SUBSET_SIZE = int(os.getenv('MAMID_SUBSET_SIZE', 10000))
    TEST_FRACTION = float(os.getenv('MAMID_TEST_FRACTION', 0.25))

    # explanations
    EXPLAIN_FEATURES = int(os.getenv('MAMID_EXPLAIN_FEATURES', 12))
    EXPLAIN_COALITIONS = int(os.getenv('MAMID_EXPLAIN_COALITIONS', 2048))
    BACKGROUND_SIZE = int(os.getenv('MAMID_BACKGROUND_SIZE', 100))
    EXPLAIN_SAMPLES = int(os.getenv('MAMID_EXPLAIN_SAMPLES', 20))
