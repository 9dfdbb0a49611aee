#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace flowrank {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unresolvable input records (files, registries, codes).
class IngestError : public Error {
public:
    using Error::Error;
};

/// Data that violates a model invariant (negative flows, NaN, zero totals).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Iterative solver failed to reach the requested tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_ = 0.0;
};

/// Finite-difference probe could not establish linearity.
class LinearityError : public Error {
public:
    LinearityError(const std::string& what, int worst_component, double worst_rel)
        : Error(what), worst_component_(worst_component), worst_rel_(worst_rel) {}
    int worst_component() const { return worst_component_; }
    double worst_relative_disagreement() const { return worst_rel_; }

private:
    int worst_component_ = -1;
    double worst_rel_ = 0.0;
};

/// A pipeline stage failed; carries the stage name for the partial manifest.
class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& what)
        : Error(stage + ": " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Shortest decimal form that round-trips a double (deterministic output).
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x) {
        // try to shorten
        for (int prec = 1; prec < 17; ++prec) {
            char s[40];
            std::snprintf(s, sizeof(s), "%.*g", prec, x);
            std::sscanf(s, "%lf", &back);
            if (back == x) return s;
        }
    }
    return buf;
}

/// FNV-1a 64-bit, used for content digests in manifests.
class Fnv1a {
public:
    void update(const void* data, size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ull;
        }
    }
    void update(std::string_view s) { update(s.data(), s.size()); }
    uint64_t value() const { return h_; }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h_));
        return buf;
    }

private:
    uint64_t h_ = 0xcbf29ce484222325ull;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work items must be
/// independent; each index is processed exactly once, so the result of the
/// whole loop is identical for any thread count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex err_mutex;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace flowrank
