#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fusionrec {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Failed read/write on a file or stream.
class IoError : public Error {
public:
    using Error::Error;
};

// A caller violated an interface precondition (shape, layout or kind mismatch).
class ContractError : public Error {
public:
    using Error::Error;
};

// An input that must be non-empty turned out to be empty.
class EmptyInputError : public Error {
public:
    using Error::Error;
};

// Runs fn(begin, end) over contiguous chunks of [0, n). With workers <= 1 the
// call is inline; otherwise one thread per chunk. Chunk boundaries depend only
// on (n, workers), so callers that keep per-element work deterministic get
// results independent of the worker count.
inline void parallel_chunks(std::size_t n, int workers,
                            const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t k = workers < 1 ? 1 : static_cast<std::size_t>(workers);
    if (k > n) k = n;
    if (k == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(k);
    const std::size_t base = n / k, extra = n % k;
    std::size_t begin = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        pool.emplace_back(fn, begin, begin + len);
        begin += len;
    }
    for (auto& t : pool) t.join();
}

}  // namespace fusionrec
