"""Random recursive trees: percolation, destruction and limit trees."""
