# Commands module initialization
