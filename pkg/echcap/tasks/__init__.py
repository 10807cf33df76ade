# Task imports
