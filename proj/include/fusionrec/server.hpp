#pragma once

// Single-process HTTP facade over the engine: POST /recommend,
// POST /feedback, GET /health. Requests are validated before they reach the
// engine; /recommend and /feedback answer 503 until warm-up completes.

#include <atomic>
#include <memory>
#include <string>

#include "fusionrec/engine.hpp"

namespace fusionrec {

class Facade {
public:
    explicit Facade(std::shared_ptr<Engine> engine);
    ~Facade();

    Facade(const Facade&) = delete;
    Facade& operator=(const Facade&) = delete;

    void set_ready(bool ready) { ready_.store(ready); }

    // Binds and serves on the calling thread until stop().
    bool listen(const std::string& host, int port);
    // Binds an ephemeral port, serves on a background thread, returns the
    // port. Used by tests.
    int listen_background(const std::string& host);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::shared_ptr<Engine> engine_;
    std::atomic<bool> ready_{false};
};

}  // namespace fusionrec
