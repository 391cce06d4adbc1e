#include "gecforge/annotation_server.hpp"

#include "httplib.h"

#include "gecforge/error.hpp"

namespace gecforge::annotation {

namespace {

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Auth: return 401;
    case ErrorKind::NotFound: return 404;
    case ErrorKind::Conflict: return 409;
    case ErrorKind::Format:
    case ErrorKind::Input:
    case ErrorKind::Validation: return 400;
    default: return 500;
  }
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind,
                const std::string& message) {
  send_json(res, status, {{"error", kind}, {"message", message}});
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, http_status(e.kind()), std::string(error_code(e.kind())), e.what());
  } catch (const Json::exception& e) {
    send_error(res, 400, "format", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationStore& store;
  httplib::Server server;

  explicit Impl(AnnotationStore& s) : store(s) {}

  void routes() {
    server.Get("/items/next", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_param("annotator"))
          return send_error(res, 400, "usage", "missing query parameter 'annotator'");
        auto item = store.next_item(req.get_param_value("annotator"));
        if (!item) return send_json(res, 200, {{"item", nullptr}});
        send_json(res, 200,
                  {{"item", to_json(*item, store.judgment_count(item->item_id))}});
      });
    });

    server.Get(R"(/items/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        auto item = store.item(id);
        if (!item) return send_error(res, 404, "not_found", "no annotation item '" + id + "'");
        send_json(res, 200, to_json(*item, store.judgment_count(id)));
      });
    });

    server.Post("/judgments", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Judgment j = judgment_from_json(Json::parse(req.body));
        auto ack = store.submit_judgment(std::move(j));
        send_json(res, 200,
                  {{"ok", true}, {"sequence", ack.sequence}, {"status", to_string(ack.status)}});
      });
    });

    server.Get("/progress", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, 200, to_json(store.progress())); });
    });

    server.Get("/export", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        res.status = 200;
        res.set_content(store.export_log(), "application/x-ndjson");
      });
    });
  }
};

AnnotationServer::AnnotationServer(AnnotationStore& store,
                                   std::optional<std::filesystem::path> ui_dir)
    : impl_(std::make_unique<Impl>(store)) {
  impl_->routes();
  if (ui_dir) {
    if (!impl_->server.set_mount_point("/", ui_dir->string()))
      throw IoError(ui_dir->string(), "UI directory does not exist");
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0)
    throw IoError(host + ":" + std::to_string(port), "cannot bind listening socket");
  return bound;
}

void AnnotationServer::serve() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

bool AnnotationServer::running() const { return impl_->server.is_running(); }

}  // namespace gecforge::annotation
