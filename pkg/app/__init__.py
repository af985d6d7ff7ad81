"""Indoor Wi-Fi extender self-deployment engine"""
