#pragma once

#include <chrono>
#include <string>

namespace httplib {
class Server;
}

namespace swdpwr {

struct ServerConfig {
    std::string cors_origin = "*";
    std::chrono::milliseconds request_budget{60000};
    int quadrature_nodes = 30;
};

struct ApiResponse {
    int status = 200;
    std::string body;  // JSON
};

/// Transport-free request handling, shared by the HTTP listener and the tests.
ApiResponse handle_api(const std::string& method, const std::string& path, const std::string& body,
                       const ServerConfig& config);

/// Registers every route (plus CORS preflight) on an httplib server.
void install_routes(httplib::Server& server, const ServerConfig& config);

/// "host:port", default "127.0.0.1:8080".
struct BindAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};
BindAddress parse_bind_address(const std::string& text);

}  // namespace swdpwr
