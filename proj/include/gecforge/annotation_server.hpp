#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "gecforge/annotation.hpp"

namespace gecforge::annotation {

/// HTTP front of an AnnotationStore:
///   GET  /items/next?annotator=ID   -> {"item": {...}} or {"item": null}
///   GET  /items/{id}                -> item record
///   POST /judgments                 -> {"ok": true, "sequence": n, "status": s}
///   GET  /progress                  -> progress record
///   GET  /export                    -> the raw judgment log (NDJSON)
/// Errors are {"error": kind, "message": text} with 400/401/404/409/500.
/// When a UI directory is given it is served statically at "/".
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationStore& store,
                            std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds without serving yet; port 0 picks a free port. Returns the port.
  int bind(const std::string& host, int port);

  /// Serves on the bound socket until stop(). Blocks.
  void serve();

  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gecforge::annotation
