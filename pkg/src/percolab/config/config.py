import os

from dotenv import load_dotenv

from percolab import __version__


def available_cores():
    """Cores this process may run on, falling back to the machine count"""
    if hasattr(os, 'sched_getaffinity'):
        return len(os.sched_getaffinity(0))
    return os.cpu_count() or 1


class Config:
    """Toolkit configuration class"""
    def __init__(self):
        # Load environment variables from .env file
        load_dotenv()

        self.TOOLKIT_VERSION = __version__
        self.DEBUG = os.getenv('PERCOLAB_DEBUG', 'False').lower() == 'true'

        # Runner Configuration
        self.WORKERS_OVERRIDE = os.getenv('PERCOLAB_WORKERS')
        self.WORKERS = int(self.WORKERS_OVERRIDE or available_cores())
        self.OUTPUT_DIR = os.getenv('PERCOLAB_OUTPUT_DIR', 'runs')
        self.DEFAULT_EMBED_FACTOR = 2.0
        self.DEFAULT_MASTER_SEED = 0

        # Acceptance thresholds written next to the reports
        self.KS_THRESHOLD = 0.05
        self.TAIL_MIN_R2 = 0.9
        self.SUBCRITICAL_FRACTION = 0.10

        # Logging Configuration
        self.LOG_LEVEL = os.getenv('PERCOLAB_LOG_LEVEL', 'INFO')
        self.LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        self.LOG_FILE = os.getenv('PERCOLAB_LOG_FILE', os.path.join('logs', 'percolab.log'))
        self.LOG_MAX_BYTES = 10240000
        self.LOG_BACKUP_COUNT = 10

        if self.DEBUG:
            self.LOG_LEVEL = 'DEBUG'

    def resolve_workers(self, requested=None):
        """Worker count: environment override wins, then the experiment file, then cores"""
        if self.WORKERS_OVERRIDE:
            return max(1, int(self.WORKERS_OVERRIDE))
        if requested:
            return max(1, int(requested))
        return self.WORKERS


class DevelopmentConfig(Config):
    """Development configuration"""
    def __init__(self):
        super().__init__()
        self.DEBUG = True
        self.LOG_LEVEL = 'DEBUG'


class ProductionConfig(Config):
    """Batch configuration for long runs"""
    def __init__(self):
        super().__init__()
        self.DEBUG = False
        self.LOG_LEVEL = os.getenv('PERCOLAB_LOG_LEVEL', 'WARNING')


class TestingConfig(Config):
    """Testing configuration"""
    def __init__(self):
        super().__init__()
        self.DEBUG = True
        self.LOG_FILE = None
        self.WORKERS = 1


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': Config
}

def get_config():
    """Get configuration based on environment"""
    env = os.getenv('PERCOLAB_ENV', 'default')
    return config.get(env, config['default'])()
