"""
Point d'entrée principal de l'outil.
Permet de lancer la ligne de commande avec: python -m cycleforge
"""
import sys

from main import main

if __name__ == "__main__":
    sys.exit(main())
