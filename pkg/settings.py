import os

from dotenv import load_dotenv

# Charge un éventuel fichier .env avant de lire les variables
load_dotenv()

# Configuration générale
VERSION = "0.1.0"

# Nombre maximal de threads pour les passes de vérification
THREADS = max(1, int(os.getenv("CYCLEFORGE_THREADS", "1")))

LOG_LEVEL = os.getenv("CYCLEFORGE_LOG_LEVEL", "INFO").upper()

# Plafond d'états pour l'énumération du revêtement
DEFAULT_BUDGET = int(os.getenv("CYCLEFORGE_BUDGET", "1000000"))

DEFAULT_SEED = int(os.getenv("CYCLEFORGE_SEED", "0"))

# Tolérance du mode flottant (géométrie sphérique)
DEFAULT_TOLERANCE = float(os.getenv("CYCLEFORGE_TOLERANCE", "1e-9"))
