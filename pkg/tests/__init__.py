# NAIA Airport Management System Test Suite
