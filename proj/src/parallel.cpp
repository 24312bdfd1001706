#include "babelkit/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace babelkit {

int configured_threads() {
    if (const char* env = std::getenv("BABELKIT_THREADS"); env && *env) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return omp_get_max_threads();
}

int apply_thread_config() {
    int n = configured_threads();
    omp_set_num_threads(n);
    return n;
}

ThreadScope::ThreadScope(int threads) : previous_(omp_get_max_threads()) {
    omp_set_num_threads(threads > 0 ? threads : 1);
}

ThreadScope::~ThreadScope() { omp_set_num_threads(previous_); }

}  // namespace babelkit
