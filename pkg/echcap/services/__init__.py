# Service imports
