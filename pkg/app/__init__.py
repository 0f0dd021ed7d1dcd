# Partitioned task offloading study for 5G MEC
__version__ = "1.0.0"
