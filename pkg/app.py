"""
ObsLearn - aprendizado de observáveis quânticos
Ponto de entrada da linha de comando

Uso:
    python app.py <subcomando> [opções]
    python app.py --help
"""

import os
import sys

# Adicionar diretório raiz ao path para garantir imports corretos
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from core.cli import main

if __name__ == "__main__":
    sys.exit(main())
