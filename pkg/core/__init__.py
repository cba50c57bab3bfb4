"""
ObsLearn - pacote principal
"""
