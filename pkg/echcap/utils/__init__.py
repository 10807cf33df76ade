# Utility imports
