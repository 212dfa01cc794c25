//! Service configuration from a TOML file and `CARSHARE_*` environment variables.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Result, ServiceError};
use crate::password::HashParams;

pub const DEFAULT_LISTEN_ADDR: &str = "127.0.0.1:8080";
pub const DEFAULT_STORAGE_PATH: &str = "carshare.db";
pub const DEFAULT_TTL_SECS: u64 = 24 * 60 * 60;

#[derive(Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen_addr: String,
    pub storage_path: PathBuf,
    pub session_ttl_secs: u64,
    pub confirmation_ttl_secs: u64,
    pub hash: HashParams,
    /// Bearer token accepted by the admin import endpoint. Unset disables it.
    pub admin_token: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            listen_addr: DEFAULT_LISTEN_ADDR.into(),
            storage_path: DEFAULT_STORAGE_PATH.into(),
            session_ttl_secs: DEFAULT_TTL_SECS,
            confirmation_ttl_secs: DEFAULT_TTL_SECS,
            hash: HashParams::default(),
            admin_token: None,
        }
    }
}

impl std::fmt::Debug for Config {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Config")
            .field("listen_addr", &self.listen_addr)
            .field("storage_path", &self.storage_path)
            .field("session_ttl_secs", &self.session_ttl_secs)
            .field("confirmation_ttl_secs", &self.confirmation_ttl_secs)
            .field("hash", &self.hash)
            .field("admin_token", &self.admin_token.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl Config {
    /// Defaults, overridden by the file (if any), overridden by the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut config = match path {
            Some(p) => Self::from_toml(&std::fs::read_to_string(p)?)?,
            None => Config::default(),
        };
        config.apply_env(|key| std::env::var(key).ok())?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))
    }

    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: String) -> Result<T> {
            value
                .parse()
                .map_err(|_| ServiceError::Config(format!("{key}: cannot parse {value:?}")))
        }
        if let Some(v) = lookup("CARSHARE_LISTEN_ADDR") {
            self.listen_addr = v;
        }
        if let Some(v) = lookup("CARSHARE_STORAGE_PATH") {
            self.storage_path = v.into();
        }
        if let Some(v) = lookup("CARSHARE_SESSION_TTL_SECS") {
            self.session_ttl_secs = parse("CARSHARE_SESSION_TTL_SECS", v)?;
        }
        if let Some(v) = lookup("CARSHARE_CONFIRMATION_TTL_SECS") {
            self.confirmation_ttl_secs = parse("CARSHARE_CONFIRMATION_TTL_SECS", v)?;
        }
        if let Some(v) = lookup("CARSHARE_HASH_MEMORY_KIB") {
            self.hash.memory_kib = parse("CARSHARE_HASH_MEMORY_KIB", v)?;
        }
        if let Some(v) = lookup("CARSHARE_HASH_ITERATIONS") {
            self.hash.iterations = parse("CARSHARE_HASH_ITERATIONS", v)?;
        }
        if let Some(v) = lookup("CARSHARE_HASH_PARALLELISM") {
            self.hash.parallelism = parse("CARSHARE_HASH_PARALLELISM", v)?;
        }
        if let Some(v) = lookup("CARSHARE_ADMIN_TOKEN") {
            self.admin_token = Some(v).filter(|t| !t.is_empty());
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.listen_addr()?;
        if self.session_ttl_secs == 0 || self.confirmation_ttl_secs == 0 {
            return Err(ServiceError::Config("TTLs must be positive".into()));
        }
        self.hash.validate()
    }

    pub fn listen_addr(&self) -> Result<SocketAddr> {
        self.listen_addr
            .parse()
            .map_err(|_| ServiceError::Config(format!("listen_addr {:?} is not host:port", self.listen_addr)))
    }
}
