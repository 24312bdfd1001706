#pragma once

namespace babelkit {

// Thread cap read from BABELKIT_THREADS (falls back to the OpenMP default).
int configured_threads();

// Applies configured_threads() to the OpenMP runtime. Returns the value applied.
int apply_thread_config();

// Scoped override, used by tests and benchmarks to run kernels at a fixed width.
class ThreadScope {
public:
    explicit ThreadScope(int threads);
    ~ThreadScope();
    ThreadScope(const ThreadScope&) = delete;
    ThreadScope& operator=(const ThreadScope&) = delete;

private:
    int previous_;
};

}  // namespace babelkit
