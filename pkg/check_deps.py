import importlib

packages = [
    "numpy",
    "scipy",
    "pandas",
    "dotenv",     # comes from python-dotenv
    "pytest",
]

print("🔍 Checking Python libraries...\n")
for pkg in packages:
    try:
        mod = importlib.import_module(pkg)
        print(f"✅ {pkg} is installed ({getattr(mod, '__version__', 'unknown version')})")
    except ImportError:
        print(f"❌ {pkg} is missing")

print("\n🔍 Checking sparse solver backends...\n")
try:
    from scipy.sparse.linalg import eigsh, splu  # noqa: F401
    print("✅ scipy.sparse.linalg eigsh/splu available")
except Exception as e:
    print(f"❌ scipy sparse eigensolvers not usable: {e}")
