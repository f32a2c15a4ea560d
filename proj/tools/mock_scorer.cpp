// Stand-in scorer service speaking the remote scorer protocol. Useful for
// manual runs against the remote path and as the counterpart of the scorer
// integration tests. Scores are fixed via flags; --fail-first N makes the
// first N requests return HTTP 500 to exercise retry handling.

#include <atomic>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"
#include "json.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mock scorer service (POST /score)"};
    int port = 8044;
    double aesthetic = 6.0;
    double alignment = 7.5;
    int fail_first = 0;
    app.add_option("--port", port, "listen port");
    app.add_option("--aesthetic", aesthetic, "aesthetic score to return");
    app.add_option("--alignment", alignment, "alignment score to return");
    app.add_option("--fail-first", fail_first, "return HTTP 500 for the first N requests");
    CLI11_PARSE(app, argc, argv);

    std::atomic<int> requests{0};
    httplib::Server server;
    server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = requests.fetch_add(1);
        if (n < fail_first) {
            res.status = 500;
            return;
        }
        nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.contains("pixels_b64")) {
            res.status = 400;
            return;
        }
        nlohmann::json reply = {{"aesthetic", aesthetic}, {"alignment", alignment}};
        res.set_content(reply.dump(), "application/json");
    });

    std::cout << "mock scorer listening on 127.0.0.1:" << port << "\n";
    server.listen("127.0.0.1", port);
    return 0;
}
