#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use defembed::synthetic::ToyWorld;
use defembed::{
    build_vocabulary, checkpoint, init_parameters, train, Architecture, EmbeddingStore, Encoder, EncoderConfig,
    InputMode, LossConfig, OutputNonlinearity, TrainConfig,
};
use defembed_cli::service::{self, AppState, ServiceConfig};
use tempfile::TempDir;
use tokio::sync::oneshot;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_defembed"))
}

/// Runs the CLI with no `DEFEMBED_*` variables leaking in from the caller.
pub fn run(args: &[&str], dir: &Path) -> Output {
    let mut cmd = bin();
    for (k, _) in std::env::vars() {
        if k.starts_with("DEFEMBED_") {
            cmd.env_remove(k);
        }
    }
    cmd.current_dir(dir).args(args).output().expect("spawn defembed")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A trained toy model with its stores written to a temp dir.
pub struct Fixture {
    pub dir: TempDir,
    pub world: ToyWorld,
    pub fr: EmbeddingStore,
    pub model: Encoder<f32>,
    pub config: ServiceConfig,
}

pub fn train_model(world: &ToyWorld, arch: Architecture, seed: u64, epochs: usize) -> Encoder<f32> {
    let vocab = build_vocabulary(&world.dictionary, 1).unwrap();
    let config = EncoderConfig {
        architecture: arch,
        input_mode: InputMode::Learned,
        input_dim: 16,
        hidden_dim: 12,
        target_dim: world.target.dim(),
        output_nonlinearity: OutputNonlinearity::Tanh,
        seed,
    };
    let mut model = init_parameters(&config, &vocab, None).unwrap();
    let tc = TrainConfig {
        max_epochs: epochs,
        shuffle_seed: seed,
        ..TrainConfig::default()
    };
    train(&mut model, &world.dictionary, &tc, &LossConfig::default(), &world.target).unwrap();
    model
}

pub fn fixture(seed: u64) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let world = ToyWorld::generate(60, 16, seed);
    let (fr, _) = world.translation("fr");
    let model = train_model(&world, Architecture::Bow, seed, 20);
    let p = |n: &str| -> PathBuf { dir.path().join(n) };
    world.target.save(p("target.txt")).unwrap();
    fr.save(p("target_fr.txt")).unwrap();
    checkpoint::save(&model, p("model.ckpt")).unwrap();
    let config = ServiceConfig {
        checkpoint: p("model.ckpt"),
        target: p("target.txt"),
        bilingual: vec![p("target_fr.txt")],
        bind: "127.0.0.1".into(),
        port: 0,
        default_k: 10,
        max_query_tokens: 64,
    };
    Fixture {
        dir,
        world,
        fr,
        model,
        config,
    }
}

pub struct Server {
    pub addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    handle: tokio::task::JoinHandle<anyhow::Result<()>>,
}

impl Server {
    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub async fn stop(mut self) {
        let _ = self.shutdown.take().unwrap().send(());
        self.handle.await.unwrap().unwrap();
    }
}

pub async fn start(config: &ServiceConfig) -> Server {
    let snapshot = service::load_snapshot(config).unwrap();
    let listener = service::bind(config).await.unwrap();
    let addr = listener.local_addr().unwrap();
    let (tx, rx) = oneshot::channel();
    let state = AppState::new(config.clone(), snapshot);
    let handle = tokio::spawn(service::run(listener, state, async {
        let _ = rx.await;
    }));
    Server {
        addr,
        shutdown: Some(tx),
        handle,
    }
}
