#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"

#include "swdpwr/error.hpp"
#include "swdpwr/server.hpp"

int main(int argc, char** argv) {
    CLI::App app{"HTTP API for stepped wedge power calculations", "swdpwr-server"};
    std::string bind;
    if (const char* env = std::getenv("SWDPWR_BIND")) bind = env;
    swdpwr::ServerConfig config;
    app.add_option("--bind", bind, "host:port (default 127.0.0.1:8080, env SWDPWR_BIND)");
    app.add_option("--cors-origin", config.cors_origin, "Allowed browser origin");
    CLI11_PARSE(app, argc, argv);

    swdpwr::BindAddress address;
    try {
        address = swdpwr::parse_bind_address(bind);
    } catch (const swdpwr::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    httplib::Server server;
    swdpwr::install_routes(server, config);
    std::cerr << "listening on " << address.host << ':' << address.port << "\n";
    if (!server.listen(address.host, address.port)) {
        std::cerr << "cannot bind " << address.host << ':' << address.port << "\n";
        return 1;
    }
}
