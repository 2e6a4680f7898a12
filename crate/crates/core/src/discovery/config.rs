//! Admin, team and user configuration with a single-writer store that
//! persists to a JSON state file by atomic replace.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::provider::ProviderRegistry;
use crate::spec::ProviderKey;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdminConfig {
    /// Providers switched off for everyone.
    pub disabled_providers: BTreeSet<ProviderKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamConfig {
    pub team: String,
    pub home_providers: Vec<ProviderKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserConfig {
    pub user_id: String,
    #[serde(default)]
    pub team: Option<String>,
    #[serde(default)]
    pub hidden_providers: BTreeSet<ProviderKey>,
    #[serde(default)]
    pub provider_order: Option<Vec<ProviderKey>>,
}

impl UserConfig {
    pub fn new(user_id: impl Into<String>) -> Self {
        UserConfig { user_id: user_id.into(), team: None, hidden_providers: BTreeSet::new(), provider_order: None }
    }

    pub fn hides(&self, key: &ProviderKey) -> bool {
        self.hidden_providers.contains(key)
    }

    /// Applies the user's hide list and preferred order: ordered providers
    /// first, in that order, then the rest in their original order.
    pub fn arrange<T>(&self, items: Vec<T>, key_of: impl Fn(&T) -> ProviderKey) -> Vec<T> {
        let mut items: Vec<T> = items.into_iter().filter(|item| !self.hides(&key_of(item))).collect();
        if let Some(order) = &self.provider_order {
            // Stable sort keeps unlisted providers in place relative to each other.
            items.sort_by_key(|item| {
                let key = key_of(item);
                order.iter().position(|k| *k == key).unwrap_or(usize::MAX)
            });
        }
        items
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigState {
    pub admin: AdminConfig,
    pub teams: BTreeMap<String, TeamConfig>,
    pub users: BTreeMap<String, UserConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Admin,
    TeamAdmin,
    User,
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "admin" => Ok(Role::Admin),
            "team-admin" => Ok(Role::TeamAdmin),
            "user" => Ok(Role::User),
            _ => Err(format!("unknown role \"{s}\"")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caller {
    pub user_id: String,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigScope {
    Admin,
    Team(String),
    User(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeamChange {
    pub home_providers: Vec<ProviderKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserChange {
    #[serde(default)]
    pub team: Option<String>,
    #[serde(default)]
    pub hidden_providers: BTreeSet<ProviderKey>,
    #[serde(default)]
    pub provider_order: Option<Vec<ProviderKey>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigChange {
    Admin(AdminConfig),
    Team(TeamChange),
    User(UserChange),
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("provider {0} is not registered")]
    UnknownProviderReference(ProviderKey),
    #[error("role {role:?} may not change {scope} configuration")]
    UnauthorizedScope { role: Role, scope: String },
    #[error("change does not match the {0} scope")]
    ScopeMismatch(String),
    #[error("could not persist configuration: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt configuration state: {0}")]
    Corrupt(#[from] serde_json::Error),
}

fn scope_name(scope: &ConfigScope) -> String {
    match scope {
        ConfigScope::Admin => "admin".into(),
        ConfigScope::Team(t) => format!("team \"{t}\""),
        ConfigScope::User(u) => format!("user \"{u}\""),
    }
}

fn authorize(caller: &Caller, scope: &ConfigScope) -> Result<(), ConfigError> {
    let allowed = match (caller.role, scope) {
        (Role::Admin, _) => true,
        (Role::TeamAdmin, ConfigScope::Team(_)) => true,
        (_, ConfigScope::User(user)) => *user == caller.user_id,
        _ => false,
    };
    if allowed {
        Ok(())
    } else {
        Err(ConfigError::UnauthorizedScope { role: caller.role, scope: scope_name(scope) })
    }
}

/// Readers get the current snapshot without blocking; writers are
/// serialized and publish a new snapshot only after it is on disk.
#[derive(Debug)]
pub struct ConfigStore {
    path: Option<PathBuf>,
    current: RwLock<Arc<ConfigState>>,
    writer: Mutex<()>,
}

impl ConfigStore {
    pub fn in_memory(state: ConfigState) -> Self {
        ConfigStore { path: None, current: RwLock::new(Arc::new(state)), writer: Mutex::new(()) }
    }

    /// Opens the state file, starting empty if it does not exist yet.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref().to_path_buf();
        let state = match std::fs::read(&path) {
            Ok(bytes) => serde_json::from_slice(&bytes)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => ConfigState::default(),
            Err(e) => return Err(e.into()),
        };
        Ok(ConfigStore { path: Some(path), current: RwLock::new(Arc::new(state)), writer: Mutex::new(()) })
    }

    pub fn snapshot(&self) -> Arc<ConfigState> {
        self.current.read().clone()
    }

    pub fn update(
        &self,
        caller: &Caller,
        scope: ConfigScope,
        change: ConfigChange,
        registry: &ProviderRegistry,
    ) -> Result<Arc<ConfigState>, ConfigError> {
        authorize(caller, &scope)?;
        let referenced: Vec<&ProviderKey> = match &change {
            ConfigChange::Admin(a) => a.disabled_providers.iter().collect(),
            ConfigChange::Team(t) => t.home_providers.iter().collect(),
            ConfigChange::User(u) => u.hidden_providers.iter().chain(u.provider_order.iter().flatten()).collect(),
        };
        if let Some(unknown) = referenced.into_iter().find(|k| !registry.contains(k)) {
            return Err(ConfigError::UnknownProviderReference(unknown.clone()));
        }

        let _guard = self.writer.lock();
        let mut next = (*self.snapshot()).clone();
        match (scope, change) {
            (ConfigScope::Admin, ConfigChange::Admin(admin)) => next.admin = admin,
            (ConfigScope::Team(team), ConfigChange::Team(change)) => {
                next.teams.insert(team.clone(), TeamConfig { team, home_providers: change.home_providers });
            }
            (ConfigScope::User(user_id), ConfigChange::User(change)) => {
                next.users.insert(
                    user_id.clone(),
                    UserConfig {
                        user_id,
                        team: change.team,
                        hidden_providers: change.hidden_providers,
                        provider_order: change.provider_order,
                    },
                );
            }
            (scope, _) => return Err(ConfigError::ScopeMismatch(scope_name(&scope))),
        }
        if let Some(path) = &self.path {
            persist(path, &next)?;
        }
        let next = Arc::new(next);
        *self.current.write() = next.clone();
        Ok(next)
    }
}

fn persist(path: &Path, state: &ConfigState) -> Result<(), ConfigError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    serde_json::to_writer_pretty(&mut tmp, state)?;
    tmp.write_all(b"\n")?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| ConfigError::Io(e.error))?;
    Ok(())
}
