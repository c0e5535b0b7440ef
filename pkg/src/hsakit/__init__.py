"""Handed shearing auxetic actuators modelled as programmable springs."""
