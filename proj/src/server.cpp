#include "swdpwr/server.hpp"

#include <iostream>

// Before httplib: <resolv.h> defines a `_res` macro that breaks Eigen.
#include "swdpwr/serialization.hpp"

#include "httplib.h"

namespace swdpwr {

namespace {

ApiResponse reply(int status, const json& body) { return {status, body.dump()}; }

ComputeOptions request_options(const ServerConfig& config) {
    ComputeOptions o;
    o.quadrature_nodes = config.quadrature_nodes;
    o.deadline = std::chrono::steady_clock::now() + config.request_budget;
    return o;
}

ApiResponse power(const json& body, const ServerConfig& config) {
    return reply(200, report_to_json(compute_power(spec_from_json(body), request_options(config))));
}

ApiResponse sweep(const json& body, const ServerConfig& config) {
    if (!body.is_object() || !body.contains("spec") || !body.contains("param") || !body.contains("grid"))
        throw Error(codes::kInput, "A sweep request needs \"spec\", \"param\" and \"grid\".");
    const auto& p = body.at("param");
    const auto& g = body.at("grid");
    if (!p.is_string()) throw Error(codes::kInput, "\"param\" must be a string.");
    if (!g.is_array() || g.empty()) throw Error(codes::kInput, "\"grid\" must be a non-empty array.");
    std::vector<double> grid;
    for (const auto& v : g) {
        if (!v.is_number()) throw Error(codes::kInput, "Grid values must be numbers.");
        grid.push_back(v.get<double>());
    }
    const auto param = parse_sweep_parameter(p.get<std::string>());
    const auto points = sweep_power(spec_from_json(body.at("spec")), param, grid, request_options(config));
    return reply(200, sweep_to_json(param, points));
}

ApiResponse validate(const json& body, const ServerConfig& config) {
    const auto sc = validate_scenario(spec_from_json(body), request_options(config));
    return reply(200, {{"ok", true}, {"warnings", warnings_to_json(sc.warnings)}});
}

ApiResponse health() {
    return reply(200, {{"status", "ok"}, {"service", "swdpwr"}, {"version", "1.0.0"}});
}

}  // namespace

ApiResponse handle_api(const std::string& method, const std::string& path, const std::string& body,
                       const ServerConfig& config) {
    if (method == "GET" && path == "/api/health") return health();
    if (method != "POST" || (path != "/api/power" && path != "/api/sweep" && path != "/api/validate"))
        return reply(404, {{"code", "E-NOT-FOUND"}, {"message", method + " " + path + " is not an endpoint."}});

    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::parse_error& e) {
        return reply(400, {{"code", "E-JSON"}, {"message", std::string("Malformed JSON: ") + e.what()}});
    }
    try {
        if (path == "/api/power") return power(parsed, config);
        if (path == "/api/sweep") return sweep(parsed, config);
        return validate(parsed, config);
    } catch (const Error& e) {
        json err = error_to_json(e);
        if (path == "/api/validate") err["ok"] = false;
        return reply(422, err);
    } catch (const std::exception& e) {
        return reply(500, {{"code", "E-INTERNAL"}, {"message", e.what()}});
    }
}

void install_routes(httplib::Server& server, const ServerConfig& config) {
    server.set_default_headers({{"Access-Control-Allow-Origin", config.cors_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
    auto handler = [config](const httplib::Request& req, httplib::Response& res) {
        const auto r = handle_api(req.method, req.path, req.body, config);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server.Get("/api/health", handler);
    server.Post("/api/power", handler);
    server.Post("/api/sweep", handler);
    server.Post("/api/validate", handler);
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        std::cerr << req.method << ' ' << req.path << ' ' << res.status << '\n';
    });
}

BindAddress parse_bind_address(const std::string& text) {
    BindAddress a;
    if (text.empty()) return a;
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) {
        a.host = text;
        return a;
    }
    if (colon > 0) a.host = text.substr(0, colon);
    try {
        std::size_t used = 0;
        a.port = std::stoi(text.substr(colon + 1), &used);
        if (used != text.size() - colon - 1 || a.port < 0 || a.port > 65535) throw std::out_of_range("");
    } catch (const std::exception&) {
        throw Error(codes::kInput, "Bad bind address \"" + text + "\"; expected host:port.");
    }
    return a;
}

}  // namespace swdpwr
