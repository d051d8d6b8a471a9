#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace refa {

struct ServiceConfig {
    std::filesystem::path root;
    std::string bind_address = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    // When set, POST /assessments requires this token.
    std::string admin_token;
};

/// Reads REFA_ROOT, REFA_BIND, REFA_PORT and REFA_ADMIN_TOKEN over `base`.
ServiceConfig config_from_env(ServiceConfig base = {});

/// HTTP front end over the store. Every mutation of an assessment runs
/// through that assessment's FIFO command queue and is saved before the
/// response is sent; readers see the last committed state.
///
/// Error bodies: {"error": {"code", "message", "entityRef"}} with codes from
/// refa::errc.
class Service {
public:
    explicit Service(ServiceConfig config);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket; throws refa::Error(io-error) on failure.
    /// Returns the bound port.
    int bind();
    /// Serves until stop(). Binds first if needed.
    void run();
    /// bind() + run() on a background thread.
    void start();
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace refa
